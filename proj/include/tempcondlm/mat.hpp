/**
 * @file mat.hpp
 * @brief Minimal row-major dense matrix used by the model and kernels.
 */

#ifndef TEMPCONDLM_MAT_HPP
#define TEMPCONDLM_MAT_HPP

#include <cassert>
#include <vector>

namespace tempcondlm {

template <typename Real>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<Real> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, Real(0)) {}

  Real* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const Real* row(int r) const {
    return data.data() + static_cast<std::size_t>(r) * cols;
  }
  Real& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  Real at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  std::size_t size() const { return data.size(); }

  void zero() { std::fill(data.begin(), data.end(), Real(0)); }
  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<std::size_t>(r) * c, Real(0));
  }
};

}  // namespace tempcondlm

#endif  // TEMPCONDLM_MAT_HPP
