#pragma once

#include <filesystem>
#include <map>
#include <memory>

#include "herdtrack/segmentation.hpp"

namespace herdtrack {

/// Source of per-frame semantic masks. Implementations must be callable
/// concurrently from several threads.
class MaskProvider {
 public:
  virtual ~MaskProvider() = default;
  virtual SemanticMask mask(int frame_id, const GrayImage& frame) const = 0;
};

/// Source of per-blob edge maps. `crop_rect` is the padded blob rectangle in
/// frame coordinates and `crop` the matching gray pixels.
class EdgeProvider {
 public:
  virtual ~EdgeProvider() = default;
  virtual EdgeMap edges(int frame_id, int blob_index, const BBox& crop_rect, const GrayImage& crop) const = 0;
};

/// Reads `<frame_id>.mask.png` (or `.mask.pgm`); nonzero = target class.
class FileMaskProvider final : public MaskProvider {
 public:
  explicit FileMaskProvider(std::filesystem::path dir);
  SemanticMask mask(int frame_id, const GrayImage& frame) const override;

 private:
  std::filesystem::path dir_;
};

/// Reads `<frame_id>.<blob_idx>.edge.png`; 255 = strongest edge.
class FileEdgeProvider final : public EdgeProvider {
 public:
  explicit FileEdgeProvider(std::filesystem::path dir);
  EdgeMap edges(int frame_id, int blob_index, const BBox& crop_rect, const GrayImage& crop) const override;

 private:
  std::filesystem::path dir_;
};

/// Classical fallback: normalized gradient magnitude of the crop.
class GradientEdgeProvider final : public EdgeProvider {
 public:
  EdgeMap edges(int frame_id, int blob_index, const BBox& crop_rect, const GrayImage& crop) const override;
};

/// In-memory masks keyed by frame id (synthetic ground truth).
class OracleMaskProvider final : public MaskProvider {
 public:
  explicit OracleMaskProvider(std::map<int, SemanticMask> masks) : masks_(std::move(masks)) {}
  SemanticMask mask(int frame_id, const GrayImage& frame) const override;

 private:
  std::map<int, SemanticMask> masks_;
};

/// In-memory full-frame edge maps keyed by frame id, cropped on request.
class OracleEdgeProvider final : public EdgeProvider {
 public:
  explicit OracleEdgeProvider(std::map<int, EdgeMap> edges) : edges_(std::move(edges)) {}
  EdgeMap edges(int frame_id, int blob_index, const BBox& crop_rect, const GrayImage& crop) const override;

 private:
  std::map<int, EdgeMap> edges_;
};

std::string mask_filename(int frame_id);
std::string edge_filename(int frame_id, int blob_index);

/// Mask and edge sources used together by the segmentation stage.
struct Providers {
  std::shared_ptr<const MaskProvider> masks;
  std::shared_ptr<const EdgeProvider> edges;
};

}  // namespace herdtrack
