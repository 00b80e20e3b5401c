#include "cemdc/media.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cemdc {

MediaField::MediaField(int nx, int ny, std::array<double, 2> kappa_background,
                       std::array<double, 2> capacity_background, double rho, double sigma)
    : nx_(nx), ny_(ny), cap_background_(capacity_background), rho_(rho), sigma_(sigma) {
  if (nx <= 0 || ny <= 0) throw ValidationError("media: non-positive cell counts");
  for (int c = 0; c < 2; ++c) {
    kappa_[c] = Eigen::ArrayXd::Constant(nx * ny, kappa_background[c]);
    cap_[c] = Eigen::ArrayXd::Constant(nx * ny, capacity_background[c]);
  }
  validate();
}

void MediaField::validate() const {
  if (rho_ <= 0.0) throw ValidationError("media: rho must be positive");
  if (sigma_ < 0.0) throw ValidationError("media: sigma must be nonnegative");
  for (int c = 0; c < 2; ++c) {
    if ((kappa_[c] <= 0.0).any())
      throw ValidationError("media: non-positive conductivity in continuum " + std::to_string(c + 1));
    if ((cap_[c] <= 0.0).any())
      throw ValidationError("media: non-positive capacity in continuum " + std::to_string(c + 1));
  }
  for (const auto& f : fractures_) {
    if (f.nodes.size() < 2) throw ValidationError("media: fracture polyline shorter than one edge");
    if (f.aperture <= 0.0) throw ValidationError("media: non-positive fracture aperture");
    for (int c = 0; c < 2; ++c)
      if (f.kappa[c] <= 0.0 || f.capacity[c] <= 0.0)
        throw ValidationError("media: non-positive fracture coefficient");
  }
}

void MediaField::check_compatible(const GridHierarchy& hier) const {
  if (nx_ != hier.n_fine() || ny_ != hier.n_fine()) {
    std::ostringstream os;
    os << "media: cell layout " << nx_ << "x" << ny_ << " does not match fine grid " << hier.n_fine()
       << "x" << hier.n_fine();
    throw ValidationError(os.str());
  }
}

void MediaField::add_fracture(const GridHierarchy& hier, FractureOverlay overlay) {
  if (overlay.nodes.size() < 2) throw ValidationError("media: fracture polyline shorter than one edge");
  for (size_t k = 0; k + 1 < overlay.nodes.size(); ++k) {
    auto [ia, ja] = hier.node_ij(overlay.nodes[k]);
    auto [ib, jb] = hier.node_ij(overlay.nodes[k + 1]);
    if (std::abs(ia - ib) + std::abs(ja - jb) != 1)
      throw ValidationError("media: fracture polyline leaves the fine-grid edges");
  }
  fractures_.push_back(std::move(overlay));
  validate();
}

void MediaField::set_fractures(std::vector<FractureOverlay> fractures) {
  fractures_ = std::move(fractures);
  validate();
}

namespace {

// Fine cells whose centers fall inside the fractional rectangle; if none do
// (rectangle thinner than a cell), falls back to the cell row/column nearest
// the rectangle midline so the channel survives any refinement level.
void snap_segment(const GridHierarchy& hier, const ChannelSegment& seg, std::vector<int>& out) {
  const int n = hier.n_fine();
  const Domain& d = hier.domain();
  auto cell_cx = [&](int i) { return d.x0 + (i + 0.5) * hier.hx(); };
  auto cell_cy = [&](int j) { return d.y0 + (j + 0.5) * hier.hy(); };

  int ilo = n, ihi = -1, jlo = n, jhi = -1;
  for (int i = 0; i < n; ++i)
    if (cell_cx(i) >= seg.x0 && cell_cx(i) <= seg.x1) { ilo = std::min(ilo, i); ihi = std::max(ihi, i); }
  for (int j = 0; j < n; ++j)
    if (cell_cy(j) >= seg.y0 && cell_cy(j) <= seg.y1) { jlo = std::min(jlo, j); jhi = std::max(jhi, j); }

  auto nearest = [&](double coord, double origin, double h) {
    int k = static_cast<int>(std::lround((coord - origin) / h - 0.5));
    return std::clamp(k, 0, n - 1);
  };
  if (ihi < ilo) ilo = ihi = nearest(0.5 * (seg.x0 + seg.x1), d.x0, hier.hx());
  if (jhi < jlo) jlo = jhi = nearest(0.5 * (seg.y0 + seg.y1), d.y0, hier.hy());

  for (int j = jlo; j <= jhi; ++j)
    for (int i = ilo; i <= ihi; ++i) out.push_back(hier.cell_id(i, j));
}

}  // namespace

MediaField generate_channelized(const GridHierarchy& hier, const ChannelSpec& spec, double contrast,
                                const Physics& physics, ChannelizedReport* report) {
  if (contrast < 1.0) throw ValidationError("media: contrast must be >= 1");
  for (const auto& ch : spec.channels) {
    if (ch.continuum < 0 || ch.continuum > 1) throw ValidationError("media: channel continuum out of range");
    if (ch.kappa_multiplier <= 0.0 || ch.capacity_multiplier <= 0.0)
      throw ValidationError("media: channel multipliers must be positive");
    for (const auto& s : ch.segments)
      if (s.x1 < s.x0 || s.y1 < s.y0) throw ValidationError("media: inverted channel segment");
  }

  MediaField field(hier.n_fine(), hier.n_fine(), spec.background_kappa, physics.background_capacity,
                   physics.rho, physics.sigma);
  ChannelizedReport local_report;
  if (spec.channels.empty() && contrast > 1.0)
    local_report.warnings.push_back("contrast > 1 requested but the channel list is empty");

  for (const auto& ch : spec.channels) {
    std::vector<int> cells;
    for (const auto& seg : ch.segments) snap_segment(hier, seg, cells);
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    const double kval = spec.background_kappa[ch.continuum] * contrast * ch.kappa_multiplier;
    const double cval = physics.background_capacity[ch.continuum] * ch.capacity_multiplier;
    for (int cell : cells) {
      field.kappa_mutable(ch.continuum)[cell] = kval;
      field.capacity_mutable(ch.continuum)[cell] = cval;
    }
    local_report.channel_cells.push_back(std::move(cells));
  }

  field.validate();
  if (report) *report = std::move(local_report);
  return field;
}

ChannelSpec experiment_channel_spec() {
  ChannelSpec spec;
  // Six interleaved full-width strips (continua alternate) inside the coarse
  // row y in [0.5, 0.625]; strip midlines two fine cells (at 1/128) apart so
  // they stay distinct at n_fine = 128 and n_fine = 64. Inset from the
  // lateral boundary keeps the small spectral modes alive in boundary
  // elements.
  const double inset_lo = 0.01, inset_hi = 0.99;
  for (int s = 0; s < 6; ++s) {
    Channel ch;
    ch.continuum = s % 2;
    ch.kappa_multiplier = 1.0;
    const double ylo = (68.0 + 2 * s) / 128.0, yhi = (69.0 + 2 * s) / 128.0;
    ch.segments.push_back({inset_lo, ylo, inset_hi, yhi});
    spec.channels.push_back(ch);
  }
  // Shorter channels away from the band; one of them L-shaped.
  {
    Channel ch;  // continuum 1 horizontal, lower left
    ch.continuum = 0;
    ch.segments.push_back({0.01, 32.0 / 128.0, 0.55, 33.0 / 128.0});
    spec.channels.push_back(ch);
  }
  {
    Channel ch;  // continuum 1 vertical with an elbow, lower right
    ch.continuum = 0;
    ch.segments.push_back({96.0 / 128.0, 0.05, 97.0 / 128.0, 0.45});
    ch.segments.push_back({96.0 / 128.0, 56.0 / 128.0, 0.88, 57.0 / 128.0});
    spec.channels.push_back(ch);
  }
  {
    Channel ch;  // continuum 2 horizontal, upper right
    ch.continuum = 1;
    ch.segments.push_back({0.45, 112.0 / 128.0, 0.99, 113.0 / 128.0});
    spec.channels.push_back(ch);
  }
  {
    Channel ch;  // continuum 2 vertical, upper left
    ch.continuum = 1;
    ch.segments.push_back({24.0 / 128.0, 0.78, 25.0 / 128.0, 0.97});
    spec.channels.push_back(ch);
  }
  return spec;
}

namespace {

void write_block(std::ofstream& os, const Eigen::ArrayXd& a, int nx) {
  char buf[32];
  for (int k = 0; k < a.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", a[k]);
    os << buf << (((k + 1) % nx == 0) ? '\n' : ' ');
  }
}

}  // namespace

void save_media(const MediaField& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("media: cannot open '" + path + "' for writing");
  char buf[128];
  os << "cemdc-media 1\n";
  os << field.nx() << ' ' << field.ny() << '\n';
  std::snprintf(buf, sizeof buf, "%.17g %.17g\n", field.rho(), field.sigma());
  os << buf;
  std::snprintf(buf, sizeof buf, "%.17g %.17g\n", field.background_capacity()[0],
                field.background_capacity()[1]);
  os << buf;
  for (int c = 0; c < 2; ++c) write_block(os, field.kappa(c), field.nx());
  for (int c = 0; c < 2; ++c) write_block(os, field.capacity(c), field.nx());
  os << "fractures " << field.fractures().size() << '\n';
  for (const auto& f : field.fractures()) {
    os << f.nodes.size();
    std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g %.17g %.17g\n", f.aperture, f.kappa[0],
                  f.kappa[1], f.capacity[0], f.capacity[1]);
    os << buf;
    for (size_t k = 0; k < f.nodes.size(); ++k)
      os << f.nodes[k] << (k + 1 == f.nodes.size() ? '\n' : ' ');
  }
  os << "end\n";
  if (!os) throw IoError("media: write to '" + path + "' failed");
}

MediaField load_media(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("media: cannot open '" + path + "'");
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "cemdc-media" || version != 1)
    throw ValidationError("media: '" + path + "' has a malformed header");
  int nx = 0, ny = 0;
  double rho = 0, sigma = 0;
  std::array<double, 2> cap_bg{};
  if (!(is >> nx >> ny >> rho >> sigma >> cap_bg[0] >> cap_bg[1]))
    throw ValidationError("media: '" + path + "' has a truncated header");
  if (nx <= 0 || ny <= 0) throw ValidationError("media: non-positive cell counts in '" + path + "'");

  MediaField field(nx, ny, {1.0, 1.0}, cap_bg, rho, sigma);
  auto read_block = [&](Eigen::ArrayXd& a, const char* label) {
    for (int k = 0; k < a.size(); ++k)
      if (!(is >> a[k]))
        throw ValidationError("media: '" + path + "' is truncated inside the " + label + " block");
  };
  for (int c = 0; c < 2; ++c) read_block(field.kappa_mutable(c), "conductivity");
  for (int c = 0; c < 2; ++c) read_block(field.capacity_mutable(c), "capacity");

  std::string word;
  if (is >> word) {
    if (word != "fractures") throw ValidationError("media: expected fracture section in '" + path + "'");
    size_t count = 0;
    is >> count;
    std::vector<FractureOverlay> fractures;
    for (size_t f = 0; f < count; ++f) {
      FractureOverlay fr;
      size_t n_nodes = 0;
      if (!(is >> n_nodes >> fr.aperture >> fr.kappa[0] >> fr.kappa[1] >> fr.capacity[0] >>
            fr.capacity[1]))
        throw ValidationError("media: truncated fracture record in '" + path + "'");
      fr.nodes.resize(n_nodes);
      for (auto& n : fr.nodes)
        if (!(is >> n)) throw ValidationError("media: truncated fracture polyline in '" + path + "'");
      fractures.push_back(std::move(fr));
    }
    // Edge adjacency is a grid property; it is re-validated when the field
    // meets a hierarchy.
    field.set_fractures(std::move(fractures));
  }

  for (int c = 0; c < 2; ++c) {
    if ((field.kappa(c) <= 0.0).any())
      throw ValidationError("media: non-positive conductivity in '" + path + "'");
    if ((field.capacity(c) <= 0.0).any())
      throw ValidationError("media: non-positive capacity in '" + path + "'");
  }
  return field;
}

int count_high_components(const GridHierarchy& hier, const MediaField& media, int continuum,
                          int coarse_elem, double threshold) {
  media.check_compatible(hier);
  auto [I, J] = hier.coarse_elem_ij(coarse_elem);
  const int r = hier.refinement();
  const int i0 = I * r, j0 = J * r;
  std::vector<int> label(static_cast<size_t>(r) * r, 0);
  auto idx = [&](int i, int j) { return j * r + i; };
  auto high = [&](int i, int j) {
    return media.kappa(continuum, hier.cell_id(i0 + i, j0 + j)) > threshold;
  };
  int components = 0;
  std::vector<std::pair<int, int>> stack;
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) {
      if (!high(i, j) || label[idx(i, j)]) continue;
      ++components;
      stack.push_back({i, j});
      label[idx(i, j)] = components;
      while (!stack.empty()) {
        auto [ci, cj] = stack.back();
        stack.pop_back();
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const int ni = ci + di[d], nj = cj + dj[d];
          if (ni < 0 || nj < 0 || ni >= r || nj >= r) continue;
          if (!high(ni, nj) || label[idx(ni, nj)]) continue;
          label[idx(ni, nj)] = components;
          stack.push_back({ni, nj});
        }
      }
    }
  return components;
}

}  // namespace cemdc
