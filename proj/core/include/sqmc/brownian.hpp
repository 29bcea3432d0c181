#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sqmc {

enum class PathConstruction { forward, bridge };

std::string_view to_string(PathConstruction c);
/// Accepts "forward" and "bridge"; throws std::invalid_argument otherwise.
PathConstruction parse_construction(std::string_view s);

/// A Brownian path over one unit interval on a grid of M steps, dt = 1/M.
struct PathSpec {
  std::size_t steps = 1;
  PathConstruction construction = PathConstruction::forward;

  double dt() const { return 1.0 / static_cast<double>(steps); }
  void validate() const;
};

/// Grid indices 1..M in the order the bridge fills them: M first, then
/// ceil(M * q) for q running through the Van der Corput sequence 1/2, 1/4,
/// 3/4, 1/8, ..., skipping indices already filled.
std::vector<std::size_t> bridge_fill_order(std::size_t steps);

/// Precomputed Brownian-bridge construction for a fixed M. Uniform v[0] sets
/// W_1; v[k] sets the k-th index of bridge_fill_order conditionally on its
/// nearest filled neighbours.
class BrownianBridge {
 public:
  explicit BrownianBridge(std::size_t steps);

  std::size_t steps() const { return steps_; }
  /// Per-step increments W_{m dt} - W_{(m-1) dt}, m = 1..M.
  void increments(std::span<const double> v, std::span<double> out) const;

 private:
  struct Node {
    std::size_t index;
    std::size_t left;
    std::size_t right;
    double left_weight;
    double right_weight;
    double stddev;
  };
  std::size_t steps_;
  std::vector<Node> plan_;
};

/// sqrt(dt) * Phi^{-1}(v_m) per step.
void increments_forward(std::span<const double> v, std::span<double> out);
/// Bridge construction with M = v.size().
void increments_bridge(std::span<const double> v, std::span<double> out);

/// Dispatches on the construction; `bridge` may be null for forward paths.
void path_increments(const PathSpec& spec, const BrownianBridge* bridge, std::span<const double> v,
                     std::span<double> out);

}  // namespace sqmc
