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

#ifndef TOURHMM_HMM_HPP_
#define TOURHMM_HMM_HPP_

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tourhmm/types.hpp"

namespace tourhmm {

// Hidden Markov model with jump-then-emit observations.
//
// Node i is entered through `initial(i)` or a jump `transition(j, i)`, then
// emits column k of `emission` with probability `emission(i, k)`. Columns
// follow `alphabet`; the last column is the end marker "#". Nodes that emit
// "#" are absorbing: their transition rows are empty.
template <typename Scalar>
struct BasicHmm {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Transitions = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  Vector initial;
  Transitions transition;
  Matrix emission;
  std::vector<Item> alphabet;  // sorted, without the end marker
  // Automaton state each node was built from; informational only.
  std::vector<NodeId> state_of;

  Eigen::Index size() const { return initial.size(); }
  Eigen::Index end_column() const { return static_cast<Eigen::Index>(alphabet.size()); }

  // Emission column of an item, or nullopt for items outside the alphabet.
  std::optional<Eigen::Index> column_of(Item item) const {
    if (item == kEndMarker) return end_column();
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), item);
    if (it == alphabet.end() || *it != item) return std::nullopt;
    return static_cast<Eigen::Index>(it - alphabet.begin());
  }

  Item item_at(Eigen::Index column) const {
    return column == end_column() ? kEndMarker
                                  : alphabet[static_cast<std::size_t>(column)];
  }

  template <typename Other>
  BasicHmm<Other> cast() const {
    BasicHmm<Other> out;
    out.initial = initial.template cast<Other>();
    out.transition = transition.template cast<Other>();
    out.emission = emission.template cast<Other>();
    out.alphabet = alphabet;
    out.state_of = state_of;
    return out;
  }
};

using Hmm = BasicHmm<double>;

// Throws InvariantError naming the first violated normalization invariant:
// "initial-distribution", "emission-normalization", "jump-normalization",
// "probability-range" or "shape".
template <typename Scalar>
void check_invariants(const BasicHmm<Scalar>& hmm, Scalar tol = Scalar(1e-9)) {
  using std::abs;
  const auto n = hmm.size();
  if (hmm.transition.rows() != n || hmm.transition.cols() != n ||
      hmm.emission.rows() != n ||
      hmm.emission.cols() != static_cast<Eigen::Index>(hmm.alphabet.size()) + 1) {
    throw InvariantError("shape", "matrix dimensions disagree with node count");
  }
  if (!std::is_sorted(hmm.alphabet.begin(), hmm.alphabet.end()) ||
      std::adjacent_find(hmm.alphabet.begin(), hmm.alphabet.end()) != hmm.alphabet.end()) {
    throw InvariantError("shape", "alphabet must be sorted and unique");
  }
  const bool in_range =
      (hmm.initial.array() >= Scalar(0)).all() && (hmm.initial.array() <= Scalar(1) + tol).all() &&
      (hmm.emission.array() >= Scalar(0)).all() && (hmm.emission.array() <= Scalar(1) + tol).all();
  if (!in_range) throw InvariantError("probability-range", "value outside [0, 1]");
  if (n > 0 && abs(hmm.initial.sum() - Scalar(1)) > tol) {
    throw InvariantError("initial-distribution", "initial probabilities do not sum to 1");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (abs(hmm.emission.row(i).sum() - Scalar(1)) > tol) {
      throw InvariantError("emission-normalization",
                           "node " + std::to_string(i) + " emissions do not sum to 1");
    }
    Scalar jumps(0);
    for (typename BasicHmm<Scalar>::Transitions::InnerIterator it(hmm.transition, i); it; ++it) {
      if (it.value() < Scalar(0) || it.value() > Scalar(1) + tol) {
        throw InvariantError("probability-range", "jump out of node " + std::to_string(i));
      }
      jumps += it.value();
    }
    if (abs(jumps - Scalar(1)) > tol && abs(jumps) > tol) {
      throw InvariantError("jump-normalization",
                           "node " + std::to_string(i) + " jumps sum to neither 0 nor 1");
    }
  }
}

}  // namespace tourhmm

#endif  // TOURHMM_HMM_HPP_
