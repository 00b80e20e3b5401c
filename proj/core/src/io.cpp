#include "cemdc/io.hpp"

#include <cstdio>
#include <fstream>

namespace cemdc {

void write_vtk_field(const GridHierarchy& hier, const BlockField& field, const std::string& path,
                     const std::string& name1, const std::string& name2) {
  if (field.nodes_per_continuum != hier.n_nodes())
    throw ConfigError("vtk: field does not live on the fine grid");
  std::ofstream os(path);
  if (!os) throw IoError("vtk: cannot open '" + path + "'");
  const int npa = hier.nodes_per_axis();
  os << "# vtk DataFile Version 3.0\n";
  os << "two-continuum field\n";
  os << "ASCII\n";
  os << "DATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << npa << ' ' << npa << " 1\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "ORIGIN %.17g %.17g 0\n", hier.domain().x0, hier.domain().y0);
  os << buf;
  std::snprintf(buf, sizeof buf, "SPACING %.17g %.17g 1\n", hier.hx(), hier.hy());
  os << buf;
  os << "POINT_DATA " << hier.n_nodes() << '\n';
  for (int c = 0; c < 2; ++c) {
    os << "SCALARS " << (c == 0 ? name1 : name2) << " double 1\n";
    os << "LOOKUP_TABLE default\n";
    for (int n = 0; n < hier.n_nodes(); ++n) {
      std::snprintf(buf, sizeof buf, "%.17g\n", field(c, n));
      os << buf;
    }
  }
  if (!os) throw IoError("vtk: write to '" + path + "' failed");
}

void write_spectrum_csv(const AuxiliarySpace& aux, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("spectrum: cannot open '" + path + "'");
  char buf[96];
  std::snprintf(buf, sizeof buf, "# Lambda = %.17g\n", aux.lambda_min_discarded());
  os << buf;
  std::snprintf(buf, sizeof buf, "# lambda_max = %.17g\n", aux.lambda_max_kept());
  os << buf;
  os << "elem,k,lambda\n";
  for (int j = 0; j < aux.n_elements(); ++j) {
    const auto& e = aux.element(j);
    for (int k = 0; k < e.eigenvalues.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", j, k + 1, e.eigenvalues[k]);
      os << buf;
    }
  }
  if (!os) throw IoError("spectrum: write to '" + path + "' failed");
}

void write_decay_csv(const std::vector<DecayRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("decay: cannot open '" + path + "'");
  os << "m,diff_aq_sq,tail_aq_sq\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.layers, r.diff_energy, r.tail_energy);
    os << buf;
  }
  if (!os) throw IoError("decay: write to '" + path + "' failed");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "'");
  os << content;
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace cemdc
