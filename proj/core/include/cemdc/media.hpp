#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "cemdc/grid.hpp"

namespace cemdc {

/// A fracture overlay: a polyline of consecutive fine-grid nodes (every pair
/// of neighbors is one fine edge) carrying 1-D line coefficients.
struct FractureOverlay {
  std::vector<int> nodes;                    // >= 2, consecutive fine-grid neighbors
  double aperture = 1.0;                     // d_l
  std::array<double, 2> kappa = {1.0, 1.0};  // line conductivity per continuum
  std::array<double, 2> capacity = {1.0, 1.0};
};

/// Physical constants shared by both continua.
struct Physics {
  double rho = 1.0;
  double sigma = 0.0;
  std::array<double, 2> background_capacity = {1.0, 1.0};
};

/// Per-continuum, per-fine-cell coefficient fields plus constants and
/// optional fracture overlays. Immutable after construction.
class MediaField {
public:
  MediaField(int nx, int ny, std::array<double, 2> kappa_background,
             std::array<double, 2> capacity_background, double rho, double sigma);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int n_cells() const { return nx_ * ny_; }

  double kappa(int continuum, int cell) const { return kappa_[continuum][cell]; }
  double capacity(int continuum, int cell) const { return cap_[continuum][cell]; }
  const Eigen::ArrayXd& kappa(int continuum) const { return kappa_[continuum]; }
  const Eigen::ArrayXd& capacity(int continuum) const { return cap_[continuum]; }
  Eigen::ArrayXd& kappa_mutable(int continuum) { return kappa_[continuum]; }
  Eigen::ArrayXd& capacity_mutable(int continuum) { return cap_[continuum]; }

  double rho() const { return rho_; }
  double sigma() const { return sigma_; }
  std::array<double, 2> background_capacity() const { return cap_background_; }

  const std::vector<FractureOverlay>& fractures() const { return fractures_; }
  void add_fracture(const GridHierarchy& hier, FractureOverlay overlay);
  /// Adopts fracture records without grid-adjacency checks (file loading;
  /// adjacency is validated against a hierarchy in check_compatible callers).
  void set_fractures(std::vector<FractureOverlay> fractures);

  double kappa_min(int continuum) const { return kappa_[continuum].minCoeff(); }
  double kappa_max(int continuum) const { return kappa_[continuum].maxCoeff(); }
  /// max/min ratio of the conductivity field.
  double contrast(int continuum) const { return kappa_max(continuum) / kappa_min(continuum); }

  /// Throws ValidationError if any coefficient violates positivity.
  void validate() const;
  /// Throws ValidationError if the cell layout does not match the fine grid.
  void check_compatible(const GridHierarchy& hier) const;

private:
  int nx_, ny_;
  std::array<Eigen::ArrayXd, 2> kappa_;
  std::array<Eigen::ArrayXd, 2> cap_;
  std::array<double, 2> cap_background_;
  double rho_, sigma_;
  std::vector<FractureOverlay> fractures_;
};

/// One channel: a union of axis-aligned fractional rectangles (more than one
/// segment makes an L-shaped or stair path). Values are relative to the
/// continuum background: kappa = background * contrast * kappa_multiplier,
/// capacity = background_capacity * capacity_multiplier.
struct ChannelSegment {
  double x0, y0, x1, y1;
};

struct Channel {
  int continuum = 0;
  std::vector<ChannelSegment> segments;
  double kappa_multiplier = 1.0;
  double capacity_multiplier = 1.0;
};

struct ChannelSpec {
  std::array<double, 2> background_kappa = {1.0, 1.0};
  std::vector<Channel> channels;
};

/// Diagnostics emitted by the generator; also used by tests to locate
/// channel cells without re-deriving the snapping rule.
struct ChannelizedReport {
  std::vector<std::vector<int>> channel_cells;  // per channel, global fine cell ids
  std::vector<std::string> warnings;
};

/// Paints channels over the background. Each segment is snapped to the fine
/// cells whose centers fall inside it; a segment that captures no center is
/// snapped to the nearest cell row/column so channels never vanish under
/// coarsening. Deterministic for a given spec and grid.
MediaField generate_channelized(const GridHierarchy& hier, const ChannelSpec& spec, double contrast,
                                const Physics& physics, ChannelizedReport* report = nullptr);

/// The channel layout used by the shipped experiment configurations: an
/// interleaved band of six long strips (three per continuum) inside the
/// coarse row y in [0.5, 0.625], inset one fine cell from the lateral
/// boundary, plus four shorter channels away from the band.
ChannelSpec experiment_channel_spec();

MediaField load_media(const std::string& path);
void save_media(const MediaField& field, const std::string& path);

/// Number of connected components of the high-conductivity region of one
/// continuum inside a coarse element (4-neighbor connectivity among cells
/// with kappa > threshold). Used for spectral diagnostics.
int count_high_components(const GridHierarchy& hier, const MediaField& media, int continuum,
                          int coarse_elem, double threshold);

}  // namespace cemdc
