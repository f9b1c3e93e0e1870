// distribution.hpp — exact discrete heat distributions: finitely many atoms
// (q⃗ ∈ ℝⁿ, probability), with deterministic merging of numerically identical
// heat vectors and bookkeeping for dropped near-zero probability mass.

#pragma once

#include "qpump/linalg.hpp"

namespace qpump {

enum class Scheme { Ttm, Otm };

struct HeatAtom {
  RealVector q;    // exchanged energy per subsystem
  double p = 0.0;  // probability
};

struct HeatDistribution {
  Scheme scheme = Scheme::Ttm;
  int subsystem_count = 0;
  std::vector<HeatAtom> atoms;  // merged; sorted lexicographically by q
  double dropped_mass = 0.0;    // total probability removed by the drop threshold

  double total_probability() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.p;
    return s;
  }

  RealVector mean_heat() const {
    RealVector m = RealVector::Zero(subsystem_count);
    for (const auto& a : atoms) m += a.p * a.q;
    return m;
  }

  // ⟨e^{−β⃗·q⃗}⟩ over the distribution
  double exponential_average(const RealVector& beta) const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.p * std::exp(-beta.dot(a.q));
    return s;
  }

  // max over atoms of |Σ_j q_j|
  double conservation_defect() const {
    double d = 0.0;
    for (const auto& a : atoms) d = std::max(d, std::abs(a.q.sum()));
    return d;
  }
};

namespace detail {

// Sort lexicographically, merge runs whose q agrees componentwise with the run
// representative within merge_tol (heat values come from eigenvalue
// differences, so equal energies arrive floating-point-distinct), then drop
// merged atoms below drop_tol while recording the removed mass.
inline HeatDistribution merge_atoms(Scheme scheme, int subsystems,
                                    std::vector<HeatAtom> raw, double merge_tol,
                                    double drop_tol) {
  std::sort(raw.begin(), raw.end(), [](const HeatAtom& a, const HeatAtom& b) {
    for (Eigen::Index j = 0; j < a.q.size(); ++j) {
      if (a.q(j) < b.q(j)) return true;
      if (a.q(j) > b.q(j)) return false;
    }
    return false;
  });

  HeatDistribution dist;
  dist.scheme = scheme;
  dist.subsystem_count = subsystems;
  std::vector<HeatAtom> merged;
  for (HeatAtom& atom : raw) {
    if (!merged.empty() &&
        (atom.q - merged.back().q).cwiseAbs().maxCoeff() <= merge_tol)
      merged.back().p += atom.p;
    else
      merged.push_back(std::move(atom));
  }
  for (HeatAtom& atom : merged) {
    if (atom.p < drop_tol)
      dist.dropped_mass += atom.p;
    else
      dist.atoms.push_back(std::move(atom));
  }
  return dist;
}

}  // namespace detail

}  // namespace qpump
