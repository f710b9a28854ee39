#include "crossrec/tensor.hpp"

#include <cmath>
#include <sstream>

namespace crossrec {

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i)
    os << (i ? " x " : "") << shape_[i];
  os << "]";
  return os.str();
}

}  // namespace crossrec
