#include "herdtrack/providers.hpp"

#include "herdtrack/error.hpp"
#include "herdtrack/image_io.hpp"

namespace herdtrack {

std::string mask_filename(int frame_id) { return std::to_string(frame_id) + ".mask.png"; }

std::string edge_filename(int frame_id, int blob_index) {
  return std::to_string(frame_id) + "." + std::to_string(blob_index) + ".edge.png";
}

FileMaskProvider::FileMaskProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) {
    throw Error(ErrorCode::MissingArtifact, "mask directory not found: " + dir_.string());
  }
}

SemanticMask FileMaskProvider::mask(int frame_id, const GrayImage& frame) const {
  auto path = dir_ / mask_filename(frame_id);
  if (!std::filesystem::exists(path)) path = dir_ / (std::to_string(frame_id) + ".mask.pgm");
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingArtifact, "no mask for frame " + std::to_string(frame_id));
  }
  auto mask = mask_from_gray(io::read_gray(path));
  if (mask.width != frame.width() || mask.height != frame.height()) {
    throw Error(ErrorCode::Format, "mask for frame " + std::to_string(frame_id) + " does not match frame size");
  }
  return mask;
}

FileEdgeProvider::FileEdgeProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) {
    throw Error(ErrorCode::MissingArtifact, "edge directory not found: " + dir_.string());
  }
}

EdgeMap FileEdgeProvider::edges(int frame_id, int blob_index, const BBox&, const GrayImage& crop) const {
  const auto path = dir_ / edge_filename(frame_id, blob_index);
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingArtifact,
                "no edge map for frame " + std::to_string(frame_id) + " blob " + std::to_string(blob_index));
  }
  auto edges = edge_map_from_gray(io::read_gray(path));
  if (edges.width != crop.width() || edges.height != crop.height()) {
    throw Error(ErrorCode::Format, "edge map for frame " + std::to_string(frame_id) + " blob " +
                                       std::to_string(blob_index) + " does not match the blob crop");
  }
  return edges;
}

EdgeMap GradientEdgeProvider::edges(int, int, const BBox&, const GrayImage& crop) const {
  return gradient_edge_map(crop);
}

SemanticMask OracleMaskProvider::mask(int frame_id, const GrayImage&) const {
  const auto it = masks_.find(frame_id);
  if (it == masks_.end()) throw Error(ErrorCode::MissingArtifact, "no mask for frame " + std::to_string(frame_id));
  return it->second;
}

EdgeMap OracleEdgeProvider::edges(int frame_id, int blob_index, const BBox& crop_rect, const GrayImage&) const {
  const auto it = edges_.find(frame_id);
  if (it == edges_.end()) {
    throw Error(ErrorCode::MissingArtifact,
                "no edge map for frame " + std::to_string(frame_id) + " blob " + std::to_string(blob_index));
  }
  return it->second.crop(crop_rect);
}

}  // namespace herdtrack
