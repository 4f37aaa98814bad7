#include "flutekit/error.hpp"

namespace flutekit {

void throw_input(const std::string& what) { throw Error(ErrorKind::input, what); }

void throw_degenerate(const std::string& what) {
  throw Error(ErrorKind::fit_degenerate, what);
}

}  // namespace flutekit
