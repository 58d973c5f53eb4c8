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

#include "tourhmm/types.hpp"

namespace tourhmm {

std::string item_label(Item item) {
  return item == kEndMarker ? std::string("#") : std::to_string(item);
}

std::string to_string(const Sequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) out += ' ';
    out += item_label(seq[i]);
  }
  return out;
}

std::string compact_label(const Sequence& seq) {
  std::string out;
  bool wide = false;
  for (Item item : seq) wide = wide || item > 9;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (wide && i > 0) out += '-';
    out += item_label(seq[i]);
  }
  return out;
}

}  // namespace tourhmm
