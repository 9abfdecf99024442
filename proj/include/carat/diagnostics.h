//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_DIAGNOSTICS_H_
#define CARAT_DIAGNOSTICS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace carat {

enum class Severity {
  kWarning,
  kError,
};

struct Diagnostic {
  Severity severity = Severity::kError;
  // Stable machine-readable tag, e.g. "mu-sum".
  std::string code;
  // Node or record the finding refers to.
  std::string location;
  std::string message;
  std::optional<double> value;
};

inline bool has_errors(std::span<const Diagnostic> diagnostics) {
  for (const Diagnostic &d: diagnostics)
    if (d.severity == Severity::kError)
      return true;
  return false;
}

std::string format_diagnostic(const Diagnostic &diagnostic);

}  // namespace carat

#endif  // CARAT_DIAGNOSTICS_H_
