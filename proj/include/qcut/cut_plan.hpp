#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "qcut/circuit.hpp"
#include "qcut/qpd.hpp"
#include "qcut/rng.hpp"

namespace qcut {

inline constexpr std::size_t kDefaultCutCap = 8;

struct CutSite {
  std::size_t op_index = 0;
  CutDressing dressing;
  QPDTerms terms;
};

/// Base circuit plus the positions of the gates to cut, in circuit order.
class CutPlan {
 public:
  CutPlan(Circuit base, std::vector<std::size_t> cut_indices, std::size_t cap = kDefaultCutCap)
      : base_(std::move(base)) {
    std::sort(cut_indices.begin(), cut_indices.end());
    cut_indices.erase(std::unique(cut_indices.begin(), cut_indices.end()), cut_indices.end());
    if (cut_indices.size() > cap) {
      throw Error(ErrorCode::TooManyCuts, std::to_string(cut_indices.size()) + " cuts exceed cap " + std::to_string(cap));
    }
    for (std::size_t idx : cut_indices) {
      if (idx >= base_.size()) throw Error(ErrorCode::IndexOutOfRange, "cut index " + std::to_string(idx));
      CutSite site{idx, cut_dress_gate(base_[idx]), {}};
      site.terms = qpd_rzz(site.dressing.theta);
      sites_.push_back(std::move(site));
    }
  }

  const Circuit& base() const { return base_; }
  int width() const { return base_.width(); }
  std::size_t cut_count() const { return sites_.size(); }
  const std::vector<CutSite>& sites() const { return sites_; }

  std::vector<std::size_t> cut_indices() const {
    std::vector<std::size_t> out;
    for (const auto& s : sites_) out.push_back(s.op_index);
    return out;
  }

  /// 6^k; assignment ids are base-6 numbers with cut 0 as the lowest digit.
  std::uint64_t assignment_count() const {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < sites_.size(); ++i) n *= 6;
    return n;
  }

  std::vector<int> assignment(std::uint64_t id) const {
    std::vector<int> terms(sites_.size());
    for (auto& t : terms) {
      t = static_cast<int>(id % 6);
      id /= 6;
    }
    return terms;
  }

  double coefficient(std::uint64_t id) const {
    double c = 1.0;
    for (const auto& site : sites_) {
      c *= site.terms[id % 6].coefficient;
      id /= 6;
    }
    return c;
  }

  /// Product of per-cut sampling overheads.
  double gamma() const {
    double g = 1.0;
    for (const auto& s : sites_) g *= qpd_gamma(s.dressing.theta);
    return g;
  }

  /// Cut-free circuit for one assignment. Cut j's measurement uses slot j.
  Circuit subexperiment(std::uint64_t id) const {
    Circuit out(base_.width());
    std::size_t next = 0;
    const auto& ops = base_.ops();
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (next < sites_.size() && sites_[next].op_index == i) {
        const auto& site = sites_[next];
        for (const auto& op : site.dressing.pre) out.add(op);
        append_term(out, site.terms[id % 6], site.dressing.qubit_a, site.dressing.qubit_b, static_cast<int>(next));
        for (const auto& op : site.dressing.post) out.add(op);
        id /= 6;
        ++next;
      } else {
        out.add(ops[i]);
      }
    }
    return out;
  }

 private:
  Circuit base_;
  std::vector<CutSite> sites_;
};

/// Indices of two-qubit gates whose qubits lie on different sides of the
/// partition (side_a lists one side; every other qubit is on the other).
inline std::vector<std::size_t> crossing_gates(const Circuit& circuit, const std::vector<int>& side_a) {
  auto on_a = [&](int q) { return std::find(side_a.begin(), side_a.end(), q) != side_a.end(); };
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < circuit.size(); ++i) {
    const auto& op = circuit[i];
    if (op.arity() == 2 && on_a(op.qubits[0]) != on_a(op.qubits[1])) out.push_back(i);
  }
  return out;
}

struct Subexperiment {
  std::uint64_t id = 0;
  Circuit circuit;
  double coefficient = 0.0;
};

/// All 6^k subexperiments in assignment-id order.
inline std::vector<Subexperiment> enumerate_subexperiments(const CutPlan& plan) {
  std::vector<Subexperiment> out;
  out.reserve(plan.assignment_count());
  for (std::uint64_t id = 0; id < plan.assignment_count(); ++id)
    out.push_back({id, plan.subexperiment(id), plan.coefficient(id)});
  return out;
}

struct SampledTerm {
  std::uint64_t id = 0;
  int sign = 1;
};

/// Draws assignments i.i.d. with probability prod |c_i| / gamma^k.
inline std::vector<SampledTerm> sample_subexperiment_terms(const CutPlan& plan, std::size_t num_samples,
                                                           std::uint64_t seed) {
  if (num_samples < 1) throw Error(ErrorCode::BadRange, "num_samples must be >= 1");
  std::vector<std::vector<double>> cdfs;
  for (const auto& site : plan.sites()) {
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& t : site.terms) cdf.push_back(acc += std::abs(t.coefficient));
    cdfs.push_back(std::move(cdf));
  }
  std::vector<SampledTerm> out(num_samples);
  for (std::size_t s = 0; s < num_samples; ++s) {
    Stream rng{seed, 0x51ULL, s};
    std::uint64_t id = 0, radix = 1;
    int sign = 1;
    for (std::size_t j = 0; j < cdfs.size(); ++j) {
      const double u = rng.uniform() * cdfs[j].back();
      auto t = static_cast<std::size_t>(std::upper_bound(cdfs[j].begin(), cdfs[j].end(), u) - cdfs[j].begin());
      t = std::min<std::size_t>(t, 5);
      if (plan.sites()[j].terms[t].coefficient < 0) sign = -sign;
      id += t * radix;
      radix *= 6;
    }
    out[s] = {id, sign};
  }
  return out;
}

/// Collapses a sample multiset into (assignment, weight) pairs whose
/// weighted sum is an unbiased estimate of the full enumeration:
/// weight = sign * gamma^k * count / num_samples.
inline std::vector<std::pair<std::uint64_t, double>> sampled_weights(const CutPlan& plan,
                                                                     const std::vector<SampledTerm>& samples) {
  std::map<std::uint64_t, double> acc;
  const double scale = plan.gamma() / static_cast<double>(samples.size());
  for (const auto& s : samples) acc[s.id] += s.sign * scale;
  return {acc.begin(), acc.end()};
}

/// Hoeffding plus union-bound shot count: ceil(Gamma^2 ln(2/delta) / (2 eps^2)).
inline std::uint64_t required_shots(double epsilon, double delta, const std::vector<double>& thetas) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::BadRange, "epsilon and delta must lie in (0, 1)");
  }
  double gamma = 1.0;
  for (double t : thetas) gamma *= qpd_gamma(t);
  return static_cast<std::uint64_t>(std::ceil(gamma * gamma * std::log(2.0 / delta) / (2.0 * epsilon * epsilon)));
}

}  // namespace qcut
