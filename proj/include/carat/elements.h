//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_ELEMENTS_H_
#define CARAT_ELEMENTS_H_

#include <optional>
#include <string_view>

namespace carat {

struct ElementInfo {
  std::string_view symbol;
  int atomic_number;
  // Standard atomic weight in g/mol at five significant figures; nullopt for
  // elements without a standard atomic weight.
  std::optional<double> atomic_weight;
};

const ElementInfo *find_element(std::string_view symbol);

// Throws carat::Error if the element is unknown or has no standard weight.
double atomic_weight(std::string_view symbol);

}  // namespace carat

#endif  // CARAT_ELEMENTS_H_
