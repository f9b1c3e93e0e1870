// model.hpp — pump experiment description: subsystem dimensions, local
// Hamiltonians, inverse temperatures, piecewise-constant interaction schedule.
// Provides validation, the product eigenbasis of the total bare Hamiltonian,
// the initial product Gibbs state, and the evolution operator.

#pragma once

#include "qpump/linalg.hpp"

#include <numeric>
#include <optional>
#include <utility>

namespace qpump {

struct InvalidModelError : std::runtime_error {
  explicit InvalidModelError(const std::string& what) : std::runtime_error(what) {}
};

// --------------------------------- Pauli terms ------------------------------

enum class Pauli { I, X, Y, Z };

inline ComplexMatrix pauli_matrix(Pauli p) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  switch (p) {
    case Pauli::I: m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    case Pauli::X: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case Pauli::Y: m(0, 1) = Complex(0.0, -1.0); m(1, 0) = Complex(0.0, 1.0); break;
    case Pauli::Z: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
  }
  return m;
}

// coefficient × product of Pauli factors, one factor per referenced subsystem
struct PauliTerm {
  double coefficient = 0.0;
  std::vector<std::pair<int, Pauli>> factors;
};

// Σ over terms of coefficient × (embedded Pauli product). Hermitian exactly:
// the coefficients are real and conjugation commutes with the entry arithmetic.
inline ComplexMatrix build_pauli_operator(const std::vector<PauliTerm>& terms,
                                          const std::vector<int>& dims) {
  const int n = static_cast<int>(dims.size());
  long total = 1;
  for (int d : dims) total *= d;
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (const PauliTerm& term : terms) {
    std::vector<Pauli> slot_op(static_cast<size_t>(n), Pauli::I);
    std::vector<bool> seen(static_cast<size_t>(n), false);
    for (const auto& [slot, op] : term.factors) {
      if (slot < 0 || slot >= n)
        throw DimensionError("build_pauli_operator: subsystem index " +
                             std::to_string(slot) + " out of range");
      if (seen[static_cast<size_t>(slot)])
        throw DimensionError("build_pauli_operator: subsystem " +
                             std::to_string(slot) + " referenced twice in one term");
      if (dims[static_cast<size_t>(slot)] != 2)
        throw DimensionError("build_pauli_operator: subsystem " +
                             std::to_string(slot) + " has dimension " +
                             std::to_string(dims[static_cast<size_t>(slot)]) +
                             ", Pauli factors require dimension 2");
      seen[static_cast<size_t>(slot)] = true;
      slot_op[static_cast<size_t>(slot)] = op;
    }
    ComplexMatrix prod = ComplexMatrix::Identity(1, 1);
    for (int j = 0; j < n; ++j) {
      if (slot_op[static_cast<size_t>(j)] == Pauli::I)
        prod = kron(prod, ComplexMatrix::Identity(dims[static_cast<size_t>(j)],
                                                  dims[static_cast<size_t>(j)]));
      else
        prod = kron(prod, pauli_matrix(slot_op[static_cast<size_t>(j)]));
    }
    out += term.coefficient * prod;
  }
  return out;
}

// ---------------------------------- PumpModel -------------------------------

enum class ConservationPolicy { Error, Warn };

struct ModelOptions {
  ConservationPolicy conservation = ConservationPolicy::Error;
  double merge_tol = tol::merge_default;
  double drop_tol = tol::drop_default;
};

struct InteractionSegment {
  ComplexMatrix v;         // acts on the joint space
  double duration = 0.0;
};

struct PumpModel {
  std::vector<int> dims;
  std::vector<ComplexMatrix> local_h;              // each in its own subsystem space
  std::vector<double> beta;
  std::vector<InteractionSegment> interaction;     // covers [0, tau]; empty = free evolution
  double tau = 0.0;
  ModelOptions options;

  int subsystem_count() const { return static_cast<int>(dims.size()); }
  long total_dim() const {
    long d = 1;
    for (int dj : dims) d *= dj;
    return d;
  }
};

// -------------------------------- Validation --------------------------------

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double violation = 0.0;        // measured norm where applicable
  bool conservation = false;     // downgradable to a warning
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool degenerate_local_spectrum = false;  // any local eigenvalue gap < 1e-10

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  bool passed(ConservationPolicy policy) const {
    for (const auto& c : checks)
      if (!c.passed && !(policy == ConservationPolicy::Warn && c.conservation))
        return false;
    return true;
  }
  std::string failure_summary(ConservationPolicy policy = ConservationPolicy::Error) const {
    std::string out;
    for (const auto& c : checks) {
      if (c.passed || (policy == ConservationPolicy::Warn && c.conservation)) continue;
      if (!out.empty()) out += "; ";
      out += c.name;
    }
    return out;
  }
};

inline ComplexMatrix total_bare_hamiltonian(const PumpModel& model);

// Checks every model invariant and reports measured violation norms. Report
// only; downstream operations reject models whose report does not pass.
inline ValidationReport validate(const PumpModel& model) {
  ValidationReport report;
  auto add = [&](std::string name, bool ok, double violation = 0.0,
                 bool conservation = false) {
    report.checks.push_back({std::move(name), ok, violation, conservation});
  };

  const size_t n = model.dims.size();
  bool structure_ok = n >= 1 && model.local_h.size() == n && model.beta.size() == n;
  for (int d : model.dims)
    if (d < 1) structure_ok = false;
  add("structure: one local hamiltonian and temperature per subsystem", structure_ok);
  if (!structure_ok) return report;

  bool dims_ok = true;
  for (size_t j = 0; j < n; ++j) {
    const ComplexMatrix& h = model.local_h[j];
    if (h.rows() != model.dims[j] || h.cols() != model.dims[j]) dims_ok = false;
  }
  add("local hamiltonian dimensions match subsystem dimensions", dims_ok);

  bool finite_ok = true;
  for (const auto& h : model.local_h) finite_ok = finite_ok && h.allFinite();
  for (const auto& seg : model.interaction)
    finite_ok = finite_ok && seg.v.allFinite() && std::isfinite(seg.duration);
  finite_ok = finite_ok && std::isfinite(model.tau);
  add("finite entries", finite_ok);
  if (!dims_ok || !finite_ok) return report;

  for (size_t j = 0; j < n; ++j) {
    const double viol = hermiticity_violation(model.local_h[j]);
    add("local hamiltonian " + std::to_string(j) + " hermitian",
        viol <= tol::hermiticity * std::max(1.0, model.local_h[j].norm()), viol);
  }
  for (size_t j = 0; j < n; ++j)
    add("beta " + std::to_string(j) + " strictly positive and finite",
        model.beta[j] > 0.0 && std::isfinite(model.beta[j]));

  add("tau nonnegative", model.tau >= 0.0);

  const long total = model.total_dim();
  double covered = 0.0;
  bool durations_ok = true;
  for (size_t s = 0; s < model.interaction.size(); ++s) {
    const auto& seg = model.interaction[s];
    if (!(seg.duration >= 0.0)) durations_ok = false;
    covered += seg.duration;
    add("interaction segment " + std::to_string(s) + " dimension",
        seg.v.rows() == total && seg.v.cols() == total);
    const double viol = hermiticity_violation(seg.v);
    add("interaction segment " + std::to_string(s) + " hermitian",
        viol <= tol::hermiticity * std::max(1.0, seg.v.norm()), viol);
  }
  add("segment durations nonnegative", durations_ok);
  if (!model.interaction.empty()) {
    const double defect = std::abs(covered - model.tau);
    add("interaction schedule covers [0, tau]",
        defect <= 1e-12 * std::max(1.0, std::abs(model.tau)), defect);
  }

  bool segments_usable = true;
  for (const auto& c : report.checks) segments_usable = segments_usable && c.passed;
  if (segments_usable) {
    const ComplexMatrix h = total_bare_hamiltonian(model);
    for (size_t s = 0; s < model.interaction.size(); ++s) {
      const ComplexMatrix& v = model.interaction[s].v;
      const double viol = (h * v - v * h).norm();
      add("energy conservation: [H, V] vanishes for segment " + std::to_string(s),
          viol <= tol::conservation * std::max(1.0, h.norm() * v.norm()), viol,
          /*conservation=*/true);
    }
    // Degenerate local spectra make the post-measurement basis ambiguous; the
    // canonical convention keeps results deterministic, but flag it.
    for (size_t j = 0; j < n; ++j) {
      const HermitianEigen eig = hermitian_eig(model.local_h[j]);
      for (Eigen::Index k = 0; k + 1 < eig.eigenvalues.size(); ++k)
        if (eig.eigenvalues(k + 1) - eig.eigenvalues(k) < 1e-10)
          report.degenerate_local_spectrum = true;
    }
  }
  return report;
}

// Throws InvalidModelError unless the model validates under the given policy
// (default: the model's own conservation option).
inline ValidationReport require_valid(
    const PumpModel& model,
    std::optional<ConservationPolicy> policy_override = std::nullopt) {
  ValidationReport report = validate(model);
  const ConservationPolicy policy =
      policy_override.value_or(model.options.conservation);
  if (!report.passed(policy))
    throw InvalidModelError("invalid model: " + report.failure_summary(policy));
  return report;
}

// ------------------------------ Derived operators ---------------------------

inline ComplexMatrix embedded_local_hamiltonian(const PumpModel& model, int j) {
  return embed_local(model.local_h[static_cast<size_t>(j)], j, model.dims);
}

// H = Σ_j H_j ⊗ 1 on the rest
inline ComplexMatrix total_bare_hamiltonian(const PumpModel& model) {
  const long total = model.total_dim();
  ComplexMatrix h = ComplexMatrix::Zero(total, total);
  for (int j = 0; j < model.subsystem_count(); ++j)
    h += embedded_local_hamiltonian(model, j);
  return h;
}

// ------------------------------ Product eigenbasis --------------------------

struct EigenLevel {
  std::vector<int> evec_index;  // (k_0, …, k_{n-1}) into the local spectra
  RealVector energies;          // (E_0, …, E_{n-1})
  ComplexVector basis_state;
};

struct ProductEigenbasis {
  std::vector<EigenLevel> levels;        // lexicographic in evec_index
  ComplexMatrix basis_matrix;            // column k = levels[k].basis_state
  std::vector<RealVector> local_spectra; // ascending, per subsystem
};

namespace detail {

// No validation here; callers have already established it.
inline ProductEigenbasis build_eigenbasis(const PumpModel& model) {
  const int n = model.subsystem_count();
  ProductEigenbasis basis;
  basis.local_spectra.reserve(static_cast<size_t>(n));
  ComplexMatrix joint = ComplexMatrix::Identity(1, 1);
  for (int j = 0; j < n; ++j) {
    const HermitianEigen eig = hermitian_eig(model.local_h[static_cast<size_t>(j)]);
    basis.local_spectra.push_back(eig.eigenvalues);
    joint = kron(joint, eig.eigenvectors);
  }
  basis.basis_matrix = std::move(joint);

  const long total = model.total_dim();
  basis.levels.resize(static_cast<size_t>(total));
  for (long k = 0; k < total; ++k) {
    EigenLevel& level = basis.levels[static_cast<size_t>(k)];
    level.evec_index.resize(static_cast<size_t>(n));
    level.energies.resize(n);
    long rem = k;
    for (int j = n - 1; j >= 0; --j) {
      const int dj = model.dims[static_cast<size_t>(j)];
      const int kj = static_cast<int>(rem % dj);
      rem /= dj;
      level.evec_index[static_cast<size_t>(j)] = kj;
      level.energies(j) = basis.local_spectra[static_cast<size_t>(j)](kj);
    }
    level.basis_state = basis.basis_matrix.col(k);
  }
  return basis;
}

// −β⃗·E⃗ per joint level, the log of the unnormalized Gibbs weight
inline RealVector gibbs_log_weights(const PumpModel& model,
                                    const ProductEigenbasis& basis) {
  RealVector lw(static_cast<Eigen::Index>(basis.levels.size()));
  for (size_t k = 0; k < basis.levels.size(); ++k) {
    double acc = 0.0;
    for (int j = 0; j < model.subsystem_count(); ++j)
      acc -= model.beta[static_cast<size_t>(j)] * basis.levels[k].energies(j);
    lw(static_cast<Eigen::Index>(k)) = acc;
  }
  return lw;
}

inline ComplexMatrix build_evolution(const PumpModel& model, const ComplexMatrix& h) {
  const long total = model.total_dim();
  ComplexMatrix u = ComplexMatrix::Identity(total, total);
  if (model.interaction.empty()) {
    if (model.tau > 0.0) u = exp_hermitian(h, Complex(0.0, -model.tau));
    return u;
  }
  for (const InteractionSegment& seg : model.interaction) {
    if (seg.duration == 0.0) continue;
    u = exp_hermitian(h + seg.v, Complex(0.0, -seg.duration)) * u;  // latest leftmost
  }
  return u;
}

}  // namespace detail

inline ProductEigenbasis product_eigenbasis(const PumpModel& model) {
  require_valid(model);
  return detail::build_eigenbasis(model);
}

// --------------------------------- Gibbs state ------------------------------

struct GibbsState {
  ComplexMatrix rho;       // ⊗_j e^{−β_j H_j} / Z_j
  RealVector z;            // per-subsystem partition functions Z_j
  double z_product = 0.0;  // |Z⃗| = Π_j Z_j
  double log_z = 0.0;      // ln|Z⃗|, via per-subsystem log-sum-exp
};

namespace detail {

inline GibbsState build_gibbs(const PumpModel& model) {
  const int n = model.subsystem_count();
  GibbsState state;
  state.z.resize(n);
  state.z_product = 1.0;
  state.log_z = 0.0;
  state.rho = ComplexMatrix::Identity(1, 1);
  for (int j = 0; j < n; ++j) {
    const HermitianEigen eig = hermitian_eig(model.local_h[static_cast<size_t>(j)]);
    const RealVector lw = -model.beta[static_cast<size_t>(j)] * eig.eigenvalues;
    const RealVector w = softmax(lw);
    const ComplexVector wd = w.cast<Complex>();
    state.rho = kron(state.rho,
                     eig.eigenvectors * wd.asDiagonal() * eig.eigenvectors.adjoint());
    state.z(j) = lw.array().exp().sum();
    state.z_product *= state.z(j);
    state.log_z += log_sum_exp(lw);
  }
  return state;
}

}  // namespace detail

inline GibbsState gibbs_initial_state(const PumpModel& model) {
  require_valid(model);
  return detail::build_gibbs(model);
}

// ------------------------------ Evolution operator --------------------------

// Time-ordered product over the piecewise-constant schedule:
// U = Π_seg e^{−i (H + V_seg) Δt_seg}, latest segment leftmost.
inline ComplexMatrix evolution_operator(const PumpModel& model) {
  require_valid(model);
  return detail::build_evolution(model, total_bare_hamiltonian(model));
}

}  // namespace qpump
