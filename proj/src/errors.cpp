#include "diffinv/errors.hpp"

#include <sstream>

namespace diffinv {

std::string format_crossings(const std::vector<double>& crossings) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    if (i) os << ", ";
    os << crossings[i];
  }
  return os.str();
}

}  // namespace diffinv
