// Copyright 2026 The tourhmm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOURHMM_HMM_OPS_HPP_
#define TOURHMM_HMM_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tourhmm/hmm.hpp"
#include "tourhmm/types.hpp"

namespace tourhmm {

// Whether an observed sequence must be followed by the end marker.
enum class Observe { complete, prefix };

class UnobservableSequence : public std::domain_error {
 public:
  UnobservableSequence() : std::domain_error("sequence not observable") {}
};

namespace detail {

// Emission columns for `seq`, with the end column appended for complete
// observations. nullopt if an item is outside the alphabet.
template <typename Scalar>
std::optional<std::vector<Eigen::Index>> observation_columns(const BasicHmm<Scalar>& hmm,
                                                             std::span<const Item> seq,
                                                             Observe mode) {
  std::vector<Eigen::Index> cols;
  cols.reserve(seq.size() + 1);
  for (Item item : seq) {
    if (item == kEndMarker) return std::nullopt;
    auto c = hmm.column_of(item);
    if (!c) return std::nullopt;
    cols.push_back(*c);
  }
  if (mode == Observe::complete) cols.push_back(hmm.end_column());
  return cols;
}

template <typename Scalar>
Scalar log_or_ninf(Scalar x) {
  using std::log;
  return x > Scalar(0) ? log(x) : -std::numeric_limits<Scalar>::infinity();
}

}  // namespace detail

template <typename Scalar>
struct ForwardResult {
  Scalar log_probability = Scalar(0);
  bool unknown_item = false;

  Scalar probability() const {
    using std::exp;
    return exp(log_probability);
  }
};

// Scaled forward recursion. In complete mode returns Pr(seq then #);
// in prefix mode, the probability of emitting seq as a prefix.
template <typename Scalar>
ForwardResult<Scalar> forward_log(const BasicHmm<Scalar>& hmm, std::span<const Item> seq,
                                  Observe mode = Observe::complete) {
  using std::log;
  using Vector = typename BasicHmm<Scalar>::Vector;
  using Transitions = typename BasicHmm<Scalar>::Transitions;
  ForwardResult<Scalar> result;
  const auto cols = detail::observation_columns(hmm, seq, mode);
  if (!cols) {
    result.unknown_item = true;
    result.log_probability = -std::numeric_limits<Scalar>::infinity();
    return result;
  }
  if (cols->empty()) return result;

  // Only nodes with positive forward mass are carried from step to step.
  const Eigen::Index n = hmm.size();
  std::vector<std::pair<Eigen::Index, Scalar>> frontier;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = hmm.initial(i) * hmm.emission(i, cols->front());
    if (a > Scalar(0)) frontier.emplace_back(i, a);
  }
  Vector acc = Vector::Zero(n);
  std::vector<Eigen::Index> touched;
  for (std::size_t t = 0;; ++t) {
    Scalar scale(0);
    for (const auto& entry : frontier) scale += entry.second;
    if (!(scale > Scalar(0))) {
      result.log_probability = -std::numeric_limits<Scalar>::infinity();
      return result;
    }
    result.log_probability += log(scale);
    if (t + 1 == cols->size()) break;
    const Eigen::Index col = (*cols)[t + 1];
    touched.clear();
    for (const auto& [i, a] : frontier) {
      for (typename Transitions::InnerIterator it(hmm.transition, i); it; ++it) {
        const Eigen::Index j = it.col();
        if (!(it.value() > Scalar(0)) || !(hmm.emission(j, col) > Scalar(0))) continue;
        if (acc(j) == Scalar(0)) touched.push_back(j);
        acc(j) += a / scale * it.value();
      }
    }
    frontier.clear();
    for (Eigen::Index j : touched) {
      frontier.emplace_back(j, acc(j) * hmm.emission(j, col));
      acc(j) = Scalar(0);
    }
  }
  return result;
}

template <typename Scalar>
Scalar forward(const BasicHmm<Scalar>& hmm, std::span<const Item> seq,
               Observe mode = Observe::complete) {
  return forward_log(hmm, seq, mode).probability();
}

template <typename Scalar>
struct ViterbiPath {
  std::vector<Eigen::Index> nodes;
  Scalar log_probability = Scalar(0);

  Scalar probability() const {
    using std::exp;
    return exp(log_probability);
  }
  // Node the path ends on; nullopt for an empty prefix.
  std::optional<Eigen::Index> anchor() const {
    if (nodes.empty()) return std::nullopt;
    return nodes.back();
  }
};

// Most probable node path, computed in log space. Ties at every cell go to
// the smallest predecessor id, and the final tie to the smallest node id.
// Throws UnobservableSequence when no path has positive probability.
template <typename Scalar>
ViterbiPath<Scalar> viterbi(const BasicHmm<Scalar>& hmm, std::span<const Item> seq,
                            Observe mode = Observe::complete) {
  using Vector = typename BasicHmm<Scalar>::Vector;
  using Transitions = typename BasicHmm<Scalar>::Transitions;
  constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();

  const auto cols = detail::observation_columns(hmm, seq, mode);
  if (!cols) throw UnobservableSequence();
  ViterbiPath<Scalar> path;
  if (cols->empty()) return path;

  const auto n = hmm.size();
  const std::size_t steps = cols->size();
  std::vector<std::vector<Eigen::Index>> back(steps, std::vector<Eigen::Index>(static_cast<std::size_t>(n), -1));

  Vector delta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    delta(i) = detail::log_or_ninf(hmm.initial(i) * hmm.emission(i, cols->front()));
  }
  for (std::size_t t = 1; t < steps; ++t) {
    const Eigen::Index col = (*cols)[t];
    Vector next = Vector::Constant(n, kNegInf);
    auto& bp = back[t];
    for (Eigen::Index i = 0; i < n; ++i) {
      if (delta(i) == kNegInf) continue;
      for (typename Transitions::InnerIterator it(hmm.transition, i); it; ++it) {
        const Eigen::Index j = it.col();
        const Scalar e = hmm.emission(j, col);
        if (!(it.value() > Scalar(0)) || !(e > Scalar(0))) continue;
        const Scalar cand = delta(i) + detail::log_or_ninf(it.value()) + detail::log_or_ninf(e);
        // Rows are visited in increasing i, so strict > keeps the lowest id.
        if (cand > next(j)) {
          next(j) = cand;
          bp[static_cast<std::size_t>(j)] = i;
        }
      }
    }
    delta = std::move(next);
  }

  Eigen::Index best = -1;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (delta(j) == kNegInf) continue;
    if (best < 0 || delta(j) > delta(best)) best = j;
  }
  if (best < 0) throw UnobservableSequence();

  path.log_probability = delta(best);
  path.nodes.resize(steps);
  path.nodes[steps - 1] = best;
  for (std::size_t t = steps - 1; t > 0; --t) {
    path.nodes[t - 1] = back[t][static_cast<std::size_t>(path.nodes[t])];
  }
  return path;
}

struct PredictConfig {
  int length = 1;
  std::optional<std::size_t> top_k;
  bool include_end_marker = true;
  // Also report every shorter continuation on the way to `length`. Off, the
  // output is the distribution over `length`-step continuations (suffixes
  // that hit the end marker earlier stop there).
  bool partial_suffixes = false;

  void validate() const {
    if (length < 0) throw std::invalid_argument("suffix length must be >= 0");
  }
};

template <typename Scalar>
struct Suffix {
  Sequence items;
  Scalar probability = Scalar(0);
};

template <typename Scalar>
struct Prediction {
  std::vector<Suffix<Scalar>> suffixes;  // descending probability
  std::optional<Eigen::Index> anchor;    // nullopt: initial distribution
  bool fell_back = false;                // prefix was not observable
};

namespace detail {

template <typename Scalar>
void expand_suffixes(const BasicHmm<Scalar>& hmm, std::optional<Eigen::Index> from,
                     Scalar probability, Sequence& suffix, int remaining,
                     const PredictConfig& cfg, std::map<Sequence, Scalar>& out) {
  using Transitions = typename BasicHmm<Scalar>::Transitions;
  auto visit = [&](Eigen::Index child, Scalar jump) {
    if (!(jump > Scalar(0))) return;
    for (Eigen::Index k = 0; k < hmm.emission.cols(); ++k) {
      const Scalar e = hmm.emission(child, k);
      if (!(e > Scalar(0))) continue;
      const Scalar p = probability * jump * e;
      const Item item = hmm.item_at(k);
      suffix.push_back(item);
      if (item == kEndMarker) {
        if (cfg.include_end_marker) out[suffix] += p;
      } else {
        if (cfg.partial_suffixes || remaining == 1) out[suffix] += p;
        if (remaining > 1) expand_suffixes(hmm, std::optional<Eigen::Index>(child), p, suffix, remaining - 1, cfg, out);
      }
      suffix.pop_back();
    }
  };
  if (from) {
    for (typename Transitions::InnerIterator it(hmm.transition, *from); it; ++it) {
      visit(it.col(), it.value());
    }
  } else {
    for (Eigen::Index j = 0; j < hmm.size(); ++j) visit(j, hmm.initial(j));
  }
}

}  // namespace detail

// Every continuation of `prefix`, enumerated depth-first from the node the
// prefix's Viterbi path ends on. Identical suffixes are summed. An
// unobservable prefix falls back to the initial distribution.
template <typename Scalar>
Prediction<Scalar> predict_suffixes(const BasicHmm<Scalar>& hmm, std::span<const Item> prefix,
                                    const PredictConfig& cfg) {
  cfg.validate();
  Prediction<Scalar> prediction;
  try {
    prediction.anchor = viterbi(hmm, prefix, Observe::prefix).anchor();
  } catch (const UnobservableSequence&) {
    prediction.fell_back = true;
  }
  if (cfg.length == 0) return prediction;

  std::map<Sequence, Scalar> aggregated;
  Sequence suffix;
  detail::expand_suffixes(hmm, prediction.anchor, Scalar(1), suffix, cfg.length, cfg, aggregated);

  prediction.suffixes.reserve(aggregated.size());
  for (auto& [items, p] : aggregated) prediction.suffixes.push_back({items, p});
  // The map is lexicographic, so a stable sort gives the documented tie order.
  std::stable_sort(prediction.suffixes.begin(), prediction.suffixes.end(),
                   [](const Suffix<Scalar>& a, const Suffix<Scalar>& b) {
                     return a.probability > b.probability;
                   });
  if (cfg.top_k && prediction.suffixes.size() > *cfg.top_k) {
    prediction.suffixes.resize(*cfg.top_k);
  }
  return prediction;
}

// Distinct sequences with their multiplicities, in lexicographic order.
inline std::vector<std::pair<Sequence, Count>> count_distinct(std::span<const Sequence> sequences) {
  std::map<Sequence, Count> counts;
  for (const auto& s : sequences) ++counts[s];
  return {counts.begin(), counts.end()};
}

template <typename Scalar>
struct BaumWelchResult {
  BasicHmm<Scalar> model;
  // Corpus log-likelihood of the input model and after each iteration.
  std::vector<Scalar> log_likelihood;
  // Sequences with zero probability under the model, left out of the
  // statistics.
  std::size_t excluded = 0;
};

namespace detail {

template <typename Scalar>
struct Expectations {
  typename BasicHmm<Scalar>::Vector initial;
  typename BasicHmm<Scalar>::Matrix emission;
  std::vector<Scalar> transition;  // aligned with the sparse value array
  Scalar log_likelihood = Scalar(0);
  Scalar weight = Scalar(0);
  std::size_t excluded = 0;
};

// One E-step over weighted sequences, all observed as complete.
template <typename Scalar>
Expectations<Scalar> expectations(const BasicHmm<Scalar>& hmm,
                                  const std::vector<std::pair<Sequence, Count>>& corpus) {
  using std::log;
  using Vector = typename BasicHmm<Scalar>::Vector;
  using Matrix = typename BasicHmm<Scalar>::Matrix;
  using Transitions = typename BasicHmm<Scalar>::Transitions;

  const auto n = hmm.size();
  Expectations<Scalar> ex;
  ex.initial = Vector::Zero(n);
  ex.emission = Matrix::Zero(n, hmm.emission.cols());
  ex.transition.assign(static_cast<std::size_t>(hmm.transition.nonZeros()), Scalar(0));

  for (const auto& [seq, count] : corpus) {
    const auto cols = observation_columns(hmm, std::span<const Item>(seq), Observe::complete);
    if (!cols) {
      ++ex.excluded;
      continue;
    }
    const std::size_t steps = cols->size();
    Matrix alpha(n, static_cast<Eigen::Index>(steps));
    std::vector<Scalar> scale(steps);
    bool observable = true;
    for (std::size_t t = 0; t < steps; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      if (t == 0) {
        alpha.col(0) = hmm.initial.cwiseProduct(hmm.emission.col((*cols)[0]));
      } else {
        alpha.col(tt) = (hmm.transition.transpose() * alpha.col(tt - 1))
                            .cwiseProduct(hmm.emission.col((*cols)[t]));
      }
      scale[t] = alpha.col(tt).sum();
      if (!(scale[t] > Scalar(0))) {
        observable = false;
        break;
      }
      alpha.col(tt) /= scale[t];
    }
    if (!observable) {
      ++ex.excluded;
      continue;
    }

    Matrix beta(n, static_cast<Eigen::Index>(steps));
    beta.col(static_cast<Eigen::Index>(steps - 1)).setOnes();
    for (std::size_t t = steps - 1; t > 0; --t) {
      const auto tt = static_cast<Eigen::Index>(t);
      beta.col(tt - 1) =
          (hmm.transition * hmm.emission.col((*cols)[t]).cwiseProduct(beta.col(tt))) / scale[t];
    }

    const auto w = static_cast<Scalar>(count);
    ex.weight += w;
    for (Scalar s : scale) ex.log_likelihood += w * log(s);
    ex.initial += w * alpha.col(0).cwiseProduct(beta.col(0));
    for (std::size_t t = 0; t < steps; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      ex.emission.col((*cols)[t]) += w * alpha.col(tt).cwiseProduct(beta.col(tt));
    }
    for (std::size_t t = 0; t + 1 < steps; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      const Eigen::Index next_col = (*cols)[t + 1];
      std::size_t k = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar a = alpha(i, tt);
        for (typename Transitions::InnerIterator it(hmm.transition, i); it; ++it, ++k) {
          if (a == Scalar(0)) continue;
          const Eigen::Index j = it.col();
          ex.transition[k] += w * a * it.value() * hmm.emission(j, next_col) *
                              beta(j, tt + 1) / scale[t + 1];
        }
      }
    }
  }
  return ex;
}

}  // namespace detail

// Classic batch Baum-Welch over complete sequences. The sparsity pattern of
// the model is kept; rows without expected counts keep their old values.
template <typename Scalar>
BaumWelchResult<Scalar> baum_welch_update(const BasicHmm<Scalar>& hmm,
                                          std::span<const Sequence> sequences, int iterations) {
  using Transitions = typename BasicHmm<Scalar>::Transitions;
  if (sequences.empty()) throw std::invalid_argument("baum_welch_update: empty sequence set");
  if (iterations < 1) throw std::invalid_argument("baum_welch_update: iterations must be >= 1");

  const auto corpus = count_distinct(sequences);
  BaumWelchResult<Scalar> result;
  result.model = hmm;
  result.model.transition.makeCompressed();
  auto& model = result.model;

  for (int iter = 0; iter <= iterations; ++iter) {
    auto ex = detail::expectations(model, corpus);
    result.log_likelihood.push_back(ex.log_likelihood);
    result.excluded = ex.excluded;
    if (iter == iterations || ex.weight == Scalar(0)) break;

    model.initial = ex.initial / ex.weight;
    for (Eigen::Index i = 0; i < model.size(); ++i) {
      const Scalar total = ex.emission.row(i).sum();
      if (total > Scalar(0)) model.emission.row(i) = ex.emission.row(i) / total;
    }
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < model.size(); ++i) {
      const std::size_t row_begin = k;
      Scalar total(0);
      for (typename Transitions::InnerIterator it(model.transition, i); it; ++it, ++k) {
        total += ex.transition[k];
      }
      if (!(total > Scalar(0))) continue;
      k = row_begin;
      for (typename Transitions::InnerIterator it(model.transition, i); it; ++it, ++k) {
        it.valueRef() = ex.transition[k] / total;
      }
    }
  }
  return result;
}

}  // namespace tourhmm

#endif  // TOURHMM_HMM_OPS_HPP_
