#include <doctest.h>

#include <cmath>

#include "cemdc/analysis.hpp"
#include "helpers.hpp"

using namespace cemdc;
using cemdc::testing::random_vector;

namespace {

struct NormSetup {
  GridHierarchy hier;
  MediaField media;
  PartitionOfUnity pou;
  NormContext norms;

  NormSetup()
      : hier(GridHierarchy::with_fine(unit_square(), 4, 16)),
        media(cemdc::testing::desk_channel_media(hier, 100.0, 2.0)),
        pou(hier),
        norms(hier, media, pou) {}

  BlockField random_field(unsigned seed) const {
    BlockField f;
    f.nodes_per_continuum = hier.n_nodes();
    f.values = random_vector(hier.n_block_dofs(), seed);
    return f;
  }
};

}  // namespace

TEST_CASE("analysis: norms of the zero field vanish") {
  NormSetup s;
  BlockField zero = BlockField::zero(s.hier.n_nodes());
  for (NormKind k : {NormKind::c, NormKind::a, NormKind::q, NormKind::a_q, NormKind::s, NormKind::l2})
    CHECK(s.norms.norm(zero, k) == 0.0);
}

TEST_CASE("analysis: a_Q decomposes into a plus q") {
  NormSetup s;
  for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
    BlockField v = s.random_field(seed);
    const double aq = s.norms.norm(v, NormKind::a_q);
    const double a = s.norms.norm(v, NormKind::a);
    const double q = s.norms.norm(v, NormKind::q);
    CHECK(aq * aq == doctest::Approx(a * a + q * q).epsilon(1e-12));
  }
}

TEST_CASE("analysis: definite norms vanish only on the zero field") {
  NormSetup s;
  BlockField v = s.random_field(7);
  for (NormKind k : {NormKind::c, NormKind::s, NormKind::l2}) CHECK(s.norms.norm(v, k) > 0.0);
}

TEST_CASE("analysis: subdomain norms add up over a disjoint cover") {
  NormSetup s;
  for (unsigned seed : {11u, 12u}) {
    BlockField v = s.random_field(seed);
    for (NormKind k :
         {NormKind::c, NormKind::a, NormKind::q, NormKind::a_q, NormKind::s, NormKind::l2}) {
      std::vector<int> left, right;
      for (int j = 0; j < s.hier.n_coarse_elems(); ++j) (j % 3 == 0 ? left : right).push_back(j);
      const double nl = s.norms.norm(v, k, left);
      const double nr = s.norms.norm(v, k, right);
      const double ng = s.norms.norm(v, k);
      CHECK(nl * nl + nr * nr == doctest::Approx(ng * ng).epsilon(1e-12));
    }
  }
}

TEST_CASE("analysis: relative errors") {
  NormSetup s;
  BlockField p = s.random_field(21);

  RelativeErrors same = relative_errors(s.norms, p, p);
  CHECK(same.a_q_percent == 0.0);
  CHECK(same.l2_percent == 0.0);

  BlockField zero = BlockField::zero(s.hier.n_nodes());
  RelativeErrors all = relative_errors(s.norms, p, zero);
  CHECK(all.a_q_percent == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(all.l2_percent == doctest::Approx(100.0).epsilon(1e-12));

  CHECK_THROWS_AS(relative_errors(s.norms, zero, p), NumericalError);
}

TEST_CASE("analysis: order computation is scale invariant") {
  const double o1 = convergence_order(10.0, 2.5, 0.25, 0.125);
  const double o2 = convergence_order(10.0 * 7.3, 2.5 * 7.3, 0.25, 0.125);
  CHECK(o1 == doctest::Approx(o2).epsilon(1e-13));
  CHECK(o1 == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("analysis: transient metric") {
  NormSetup s;
  Trajectory a;
  a.times = {0.0, 0.5, 1.0};
  for (int k = 0; k < 3; ++k) a.states.push_back(s.random_field(30 + k));
  Trajectory b = a;

  CHECK(transient_error_metric(s.norms, a, b) == 0.0);

  b.states[2] = s.random_field(40);
  BlockField dT = a.states[2];
  dT.values -= b.states[2].values;
  const double c_term = std::pow(s.norms.norm(dT, NormKind::c), 2);
  CHECK(transient_error_metric(s.norms, a, b) >= c_term * (1.0 - 1e-13));

  Trajectory c = a;
  c.times = {0.0, 0.4, 1.0};
  CHECK_THROWS_AS(transient_error_metric(s.norms, a, c), ConfigError);
  Trajectory d = a;
  d.times.pop_back();
  d.states.pop_back();
  CHECK_THROWS_AS(transient_error_metric(s.norms, a, d), ConfigError);
}

TEST_CASE("analysis: desk-scale steady study produces orders and exact headers") {
  StudyConfig cfg;
  cfg.n_coarse_list = {4, 8};
  cfg.n_fine = 32;
  cfg.media_preset = "experiment1";
  cfg.contrast_list = {1e3};
  cfg.basis_per_element_list = {6};
  cfg.layers_from_formula = true;  // m grows with 1/H, as the convergence theory wants
  cfg.threads = 2;
  cfg.f1 = SourceSpec{SourceSpec::Kind::sinsin};
  cfg.f2 = SourceSpec{SourceSpec::Kind::constant, 1.0};

  StudyReport report = run_convergence_study(cfg);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].error.empty());
  CHECK(report.rows[1].error.empty());
  CHECK(report.rows[0].H == doctest::Approx(0.25));
  CHECK(report.rows[1].H == doctest::Approx(0.125));
  CHECK(!std::isfinite(report.rows[0].aq_order));
  CHECK(std::isfinite(report.rows[1].aq_order));
  CHECK(report.rows[1].aq_err_pct < report.rows[0].aq_err_pct);

  const std::string csv = report.to_csv();
  CHECK(csv.rfind("H,m,L,dt,aQ_err_pct,aQ_order,L2_err_pct,L2_order,contrast,wall_time_s\n", 0) ==
        0);
}

TEST_CASE("analysis: failing study rows are recorded, not fatal") {
  StudyConfig cfg;
  cfg.n_coarse_list = {4};
  cfg.n_fine = 8;
  cfg.media_preset = "none";
  cfg.contrast_list = {1.0};
  cfg.basis_per_element_list = {50};  // more eigenpairs than local dofs
  cfg.layers_from_formula = false;
  cfg.layers_list = {1};
  StudyReport report = run_convergence_study(cfg);
  REQUIRE(report.rows.size() == 1);
  CHECK(!report.rows[0].error.empty());
}
