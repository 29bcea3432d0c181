#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sqmc::detail {

// Per-call scratch space that stays on the stack for small sizes.
template <std::size_t Inline>
class Scratch {
 public:
  explicit Scratch(std::size_t n) {
    if (n <= Inline) {
      view_ = std::span<double>(inline_, n);
    } else {
      heap_.resize(n);
      view_ = heap_;
    }
  }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;

  std::span<double> span() { return view_; }
  double& operator[](std::size_t i) { return view_[i]; }

 private:
  double inline_[Inline];
  std::vector<double> heap_;
  std::span<double> view_;
};

}  // namespace sqmc::detail
