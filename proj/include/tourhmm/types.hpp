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

#ifndef TOURHMM_TYPES_HPP_
#define TOURHMM_TYPES_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tourhmm {

// Items are dense non-negative place ids. The end-of-sequence marker is the
// one reserved negative value.
using Item = std::int32_t;
inline constexpr Item kEndMarker = -1;

using NodeId = std::int32_t;
using Count = std::int64_t;

using Sequence = std::vector<Item>;

// Renders an item as text; the end marker is shown as "#".
std::string item_label(Item item);

// Space-separated rendering of a sequence, e.g. "0 5 2".
std::string to_string(const Sequence& seq);

// Compact label used in validation plots, e.g. {0,5} -> "05".
std::string compact_label(const Sequence& seq);

// Thrown when a model or artifact violates one of its structural invariants.
class InvariantError : public std::runtime_error {
 public:
  InvariantError(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail),
        invariant_(std::move(invariant)) {}

  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

}  // namespace tourhmm

#endif  // TOURHMM_TYPES_HPP_
