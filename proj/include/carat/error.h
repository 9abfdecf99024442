//
// carat - carbon attribute tracing for chemical value chains
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CARAT_ERROR_H_
#define CARAT_ERROR_H_

#include <stdexcept>
#include <string>

namespace carat {

class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input records (schema, references, duplicates).
class DataError: public Error {
public:
  using Error::Error;
};

class MappingError: public Error {
public:
  using Error::Error;
};

}  // namespace carat

#endif  // CARAT_ERROR_H_
