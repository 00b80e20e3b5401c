#pragma once

#include <string>
#include <vector>

#include "cemdc/analysis.hpp"
#include "cemdc/basis.hpp"
#include "cemdc/spectral.hpp"

namespace cemdc {

/// Legacy ASCII VTK structured-points file with two point-data scalars
/// (p1, p2) over the fine nodes.
void write_vtk_field(const GridHierarchy& hier, const BlockField& field, const std::string& path,
                     const std::string& name1 = "p1", const std::string& name2 = "p2");

/// Eigenvalue report: header comments with the summary quantities, then one
/// `elem,k,lambda` row per retained-or-discarded eigenvalue.
void write_spectrum_csv(const AuxiliarySpace& aux, const std::string& path);

/// Basis decay table: `m,diff_aq_sq,tail_aq_sq` rows.
void write_decay_csv(const std::vector<DecayRow>& rows, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace cemdc
