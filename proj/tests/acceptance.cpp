// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
//  1. TTM exchange fluctuation theorem on a random model ensemble
//  2. OTM fluctuation theorem against the trace-formula relative entropy
//  3. moment identities (distribution vs trace formula, TTM vs OTM)
//  4. energy conservation of the averages and per-level conditional heats
//  5. bound chain and the mutual-information decomposition
//  6. 3-qubit XY sweep, omega in [0, 12], 121 points
//  7. bipartite reduction over a (g, tau) grid
//  8. Monte Carlo sampling oracle for the TTM distribution
//  9. numerical kernel contracts on random matrices up to dim 32

#include "qpump/qpump.hpp"

#include "support/exchange_oracle.hpp"
#include "support/test_models.hpp"

#include <cstdio>
#include <random>
#include <vector>

using namespace qpump;
using namespace qpump::testing;

namespace {

constexpr double kTol = 1e-9;

struct Ensemble {
  std::vector<PumpModel> conserving;     // 50 random + 1 strong coupling
  std::vector<PumpModel> nonconserving;  // 10 random, warn policy
};

Ensemble build_ensemble() {
  Ensemble ensemble;
  std::mt19937_64 rng(20240817);
  for (int i = 0; i < 50; ++i)
    ensemble.conserving.push_back(random_conserving_model(rng, i % 2 ? 2 : 3));

  // strong coupling: |V| >= 10 |H| while [H, V] = 0 still holds structurally
  PumpModel strong = make_xy_model(3, 0.05, {1.0, 2.0, 3.0}, 1.0, 5.0);
  if (strong.interaction[0].v.norm() <
      10.0 * total_bare_hamiltonian(strong).norm())
    throw std::logic_error("strong-coupling fixture is not strong");
  ensemble.conserving.push_back(std::move(strong));

  for (int i = 0; i < 10; ++i)
    ensemble.nonconserving.push_back(random_nonconserving_model(rng, i % 2 ? 2 : 3));
  return ensemble;
}

bool report_line(int criterion, const char* title, bool passed,
                 const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", passed ? "PASS" : "FAIL",
              criterion, title, detail.c_str());
  return passed;
}

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

bool criterion_ttm_ft(const Ensemble& ensemble) {
  double max_dev = 0.0;
  for (const PumpModel& model : ensemble.conserving)
    max_dev = std::max(max_dev, std::abs(ttm_report(model).ft_value - 1.0));
  for (const PumpModel& model : ensemble.nonconserving)
    max_dev = std::max(max_dev, std::abs(ttm_report(model).ft_value - 1.0));
  return report_line(1, "TTM exchange fluctuation theorem <e^-b.Q> = 1",
                     max_dev <= kTol,
                     fmt("max |ft-1| = %.3g over 61 models", max_dev));
}

bool criterion_otm_ft(const Ensemble& ensemble) {
  double max_dev = 0.0;
  for (const PumpModel& model : ensemble.conserving) {
    const OtmReport report = otm_report(model);
    max_dev = std::max(max_dev, std::abs(report.ft_value_distribution -
                                         std::exp(-report.rel_entropy)));
  }
  return report_line(2, "OTM fluctuation theorem <e^-b.Q> = e^-S(rho~||rho0)",
                     max_dev <= kTol, fmt("max deviation = %.3g", max_dev));
}

bool criterion_moments(const Ensemble& ensemble) {
  double max_dev = 0.0;
  for (const PumpModel& model : ensemble.conserving) {
    const TtmReport ttm = ttm_report(model);
    const OtmReport otm = otm_report(model);
    for (size_t j = 0; j < ttm.avg_heat.size(); ++j) {
      max_dev = std::max(max_dev,
                         std::abs(ttm.avg_heat[j] - ttm.avg_heat_trace[j]));
      max_dev = std::max(max_dev,
                         std::abs(otm.avg_heat[j] - otm.avg_heat_trace[j]));
      max_dev = std::max(max_dev, std::abs(ttm.avg_heat[j] - otm.avg_heat[j]));
    }
  }
  return report_line(
      3, "moment identities: <Q_j> = tr{(rho_t-rho_0)H_j}, TTM = OTM",
      max_dev <= kTol, fmt("max deviation = %.3g", max_dev));
}

bool criterion_conservation(const Ensemble& ensemble) {
  double max_sum = 0.0, max_level = 0.0;
  for (const PumpModel& model : ensemble.conserving) {
    max_sum = std::max(max_sum, std::abs(ttm_report(model).heat_sum));
    max_level = std::max(max_level, conditional_energies(model).max_level_defect);
  }
  return report_line(
      4, "conservation: sum_j <Q_j> = 0 and per-level sum_j q~_j = 0",
      max_sum <= kTol && max_level <= kTol,
      fmt("max |sum <Q>| = %.3g, max level defect = %.3g", max_sum, max_level));
}

bool criterion_bounds(const Ensemble& ensemble) {
  double min_slack = 0.0, max_decomp = 0.0;
  for (const PumpModel& model : ensemble.conserving) {
    const OtmReport r = otm_report(model);
    min_slack = std::min(min_slack, r.entropy_production - r.rel_entropy);
    min_slack = std::min(min_slack, r.rel_entropy - r.mutual_info);
    min_slack = std::min(min_slack, r.mutual_info);
    max_decomp = std::max(
        max_decomp,
        std::abs(r.rel_entropy - r.mutual_info - r.gamma_rel_entropy));
  }
  return report_line(
      5, "bound chain sp >= S >= I >= 0 and S = I + S(gamma||rho0)",
      min_slack >= -kTol && max_decomp <= kTol,
      fmt("min slack = %.3g, max decomposition defect = %.3g", min_slack,
          max_decomp));
}

bool criterion_sweep() {
  double min_delta = std::numeric_limits<double>::infinity();
  double max_delta = 0.0, max_ratio = 0.0;
  for (int i = 0; i < 121; ++i) {
    const double omega = 12.0 * i / 120.0;
    const OtmReport report = otm_report(make_xy3(omega));
    min_delta = std::min(min_delta, report.delta);
    max_delta = std::max(max_delta, report.delta);
    // only quote the ratio where entropy production is meaningfully nonzero
    if (report.entropy_production > 1e-6)
      max_ratio = std::max(max_ratio, report.delta / report.entropy_production);
  }
  char detail[200];
  std::snprintf(detail, sizeof detail,
                "min delta = %.3g, max delta = %.3g, max delta/sp = %.3g",
                min_delta, max_delta, max_ratio);
  return report_line(6, "XY sweep omega in [0,12]: delta >= 0 at all 121 points",
                     min_delta >= -kTol, detail);
}

bool criterion_bipartite() {
  double max_ft_dev = 0.0, min_clausius = 0.0;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> g_dist(0.05, 2.5);
  std::uniform_real_distribution<double> tau_dist(0.1, 3.0);
  for (int i = 0; i < 20; ++i) {
    const PumpModel model =
        make_exchange2(1.0, g_dist(rng), tau_dist(rng), {1.0, 2.0});
    const BipartiteResult out =
        bipartite_reduction(ttm_heat_distribution(model), {1.0, 2.0});
    max_ft_dev = std::max(max_ft_dev, std::abs(out.ft_value - 1.0));
    min_clausius = std::min(min_clausius, out.clausius_lhs);
  }
  return report_line(
      7, "bipartite reduction: <e^-dB.Q> = 1 and dB.<Q> >= 0 over 20 (g,tau)",
      max_ft_dev <= kTol && min_clausius >= -kTol,
      fmt("max |ft-1| = %.3g, min dB.<Q> = %.3g", max_ft_dev, min_clausius));
}

bool criterion_monte_carlo() {
  namespace fx = frozen_exchange;
  const PumpModel model =
      make_exchange2(fx::omega, fx::g, fx::tau, {fx::beta1, fx::beta2});
  const HeatDistribution dist = ttm_heat_distribution(model);
  const ProductEigenbasis basis = product_eigenbasis(model);
  const ComplexMatrix amp =
      basis.basis_matrix.adjoint() * evolution_operator(model) * basis.basis_matrix;
  const GibbsState gibbs = gibbs_initial_state(model);
  const long d = model.total_dim();

  RealVector weights(d);
  for (long k = 0; k < d; ++k) {
    double e = 0.0;
    for (int j = 0; j < 2; ++j)
      e -= model.beta[static_cast<size_t>(j)] *
           basis.levels[static_cast<size_t>(k)].energies(j);
    weights(k) = std::exp(e) / gibbs.z_product;
  }

  const int shots = 1000000;
  std::mt19937_64 rng(20240818);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<long> counts(dist.atoms.size(), 0);
  for (int s = 0; s < shots; ++s) {
    double r = unit(rng);
    long k = 0;
    while (k < d - 1 && r > weights(k)) r -= weights(k), ++k;
    double r2 = unit(rng);
    long k2 = 0;
    while (k2 < d - 1 && r2 > std::norm(amp(k2, k)))
      r2 -= std::norm(amp(k2, k)), ++k2;
    const RealVector q = basis.levels[static_cast<size_t>(k2)].energies -
                         basis.levels[static_cast<size_t>(k)].energies;
    for (size_t a = 0; a < dist.atoms.size(); ++a)
      if ((q - dist.atoms[a].q).cwiseAbs().maxCoeff() <= 1e-9) {
        ++counts[a];
        break;
      }
  }
  double worst_pull = 0.0;
  for (size_t a = 0; a < dist.atoms.size(); ++a) {
    const double p = dist.atoms[a].p;
    const double observed = static_cast<double>(counts[a]) / shots;
    const double sigma = std::sqrt(p * (1.0 - p) / shots);
    worst_pull = std::max(worst_pull, std::abs(observed - p) / sigma);
  }

  // OTM atom probabilities are the Gibbs weights by construction
  PumpModel unmerged = model;
  unmerged.options.merge_tol = -1.0;  // keep one atom per level
  unmerged.options.drop_tol = 0.0;
  const HeatDistribution otm = otm_heat_distribution(unmerged);
  double max_weight_dev = 0.0;
  std::vector<bool> used(static_cast<size_t>(d), false);
  for (const HeatAtom& atom : otm.atoms) {
    double best = std::numeric_limits<double>::infinity();
    size_t best_k = 0;
    for (size_t k = 0; k < static_cast<size_t>(d); ++k) {
      if (used[k]) continue;
      const double dev = std::abs(atom.p - weights(static_cast<Eigen::Index>(k)));
      if (dev < best) best = dev, best_k = k;
    }
    used[best_k] = true;
    max_weight_dev = std::max(max_weight_dev, best);
  }

  return report_line(
      8, "Monte Carlo oracle: 10^6 TTM shots within 5 sigma, OTM = Gibbs",
      worst_pull <= 5.0 && max_weight_dev <= 1e-14,
      fmt("worst pull = %.3g sigma, max OTM weight deviation = %.3g",
          worst_pull, max_weight_dev));
}

bool criterion_kernel() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim_dist(2, 32);
  const std::vector<std::vector<int>> layouts = {
      {2, 2}, {2, 3}, {2, 2, 2}, {3, 3}, {4, 3}, {2, 2, 3}, {2, 16}, {2, 2, 2, 2}};
  double worst_recon = 0.0, worst_unitary = 0.0, worst_roundtrip = 0.0,
         worst_trace = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = dim_dist(rng);
    const ComplexMatrix m = random_hermitian(rng, dim);
    const HermitianEigen eig = hermitian_eig(m);
    const ComplexMatrix rebuilt = eig.eigenvectors *
                                  eig.eigenvalues.cast<Complex>().asDiagonal() *
                                  eig.eigenvectors.adjoint();
    worst_recon = std::max(worst_recon,
                           (rebuilt - m).norm() / std::max(1.0, m.norm()));
    worst_unitary =
        std::max(worst_unitary, (eig.eigenvectors.adjoint() * eig.eigenvectors -
                                 ComplexMatrix::Identity(dim, dim))
                                    .norm());

    const ComplexMatrix u = exp_hermitian(m, Complex(0.0, -0.7));
    worst_unitary = std::max(
        worst_unitary,
        (u.adjoint() * u - ComplexMatrix::Identity(dim, dim)).norm());

    ComplexMatrix scaled = m;
    scaled *= 5.0 / std::max(5.0, m.operatorNorm());
    worst_roundtrip =
        std::max(worst_roundtrip, (log_psd(exp_hermitian(scaled)) - scaled).norm());

    const std::vector<int>& dims =
        layouts[static_cast<size_t>(trial) % layouts.size()];
    long total = 1;
    for (int dj : dims) total *= dj;
    const ComplexMatrix rho = random_density_matrix(rng, static_cast<int>(total));
    for (int keep = 0; keep < static_cast<int>(dims.size()); ++keep) {
      const ComplexMatrix reduced = partial_trace(rho, {keep}, dims);
      worst_trace = std::max(
          worst_trace, std::abs(reduced.trace().real() - rho.trace().real()));
    }
  }
  const bool ok = worst_recon <= 1e-10 && worst_unitary <= 1e-10 &&
                  worst_roundtrip <= 1e-9 && worst_trace <= 1e-12;
  char detail[200];
  std::snprintf(detail, sizeof detail,
                "recon %.2g, unitary %.2g, exp/log %.2g, trace %.2g",
                worst_recon, worst_unitary, worst_roundtrip, worst_trace);
  return report_line(9, "numerical kernel contracts on 100 random matrices", ok,
                     detail);
}

}  // namespace

int main() {
  const Ensemble ensemble = build_ensemble();
  bool all = true;
  all &= criterion_ttm_ft(ensemble);
  all &= criterion_otm_ft(ensemble);
  all &= criterion_moments(ensemble);
  all &= criterion_conservation(ensemble);
  all &= criterion_bounds(ensemble);
  all &= criterion_sweep();
  all &= criterion_bipartite();
  all &= criterion_monte_carlo();
  all &= criterion_kernel();
  std::printf("%s\n", all ? "acceptance: all criteria passed"
                          : "acceptance: FAILURES present");
  return all ? 0 : 1;
}
