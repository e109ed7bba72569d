#pragma once

#include <stdexcept>
#include <string>

namespace dsegym {

// Base for every error the library raises. Callers that only care about
// "something in dsegym failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: malformed config, point outside its space, misaligned lists.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace dsegym
