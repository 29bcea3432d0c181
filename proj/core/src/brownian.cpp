#include "sqmc/brownian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sqmc/lowdisc.hpp"
#include "sqmc/normal.hpp"
#include "scratch.hpp"

namespace sqmc {

std::string_view to_string(PathConstruction c) {
  return c == PathConstruction::forward ? "forward" : "bridge";
}

PathConstruction parse_construction(std::string_view s) {
  if (s == "forward") return PathConstruction::forward;
  if (s == "bridge") return PathConstruction::bridge;
  throw std::invalid_argument("unknown path construction '" + std::string(s) + "'");
}

void PathSpec::validate() const {
  if (steps == 0) throw std::invalid_argument("path: M must be at least 1");
}

std::vector<std::size_t> bridge_fill_order(std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("bridge: M must be at least 1");
  std::vector<bool> filled(steps + 1, false);
  filled[0] = true;
  filled[steps] = true;
  std::vector<std::size_t> order{steps};
  for (std::uint64_t k = 1; order.size() < steps; ++k) {
    const double q = van_der_corput(k);
    const auto index = static_cast<std::size_t>(std::ceil(static_cast<double>(steps) * q));
    if (index == 0 || index > steps || filled[index]) continue;
    filled[index] = true;
    order.push_back(index);
  }
  return order;
}

BrownianBridge::BrownianBridge(std::size_t steps) : steps_(steps) {
  const auto order = bridge_fill_order(steps);
  const double dt = 1.0 / static_cast<double>(steps);
  std::vector<bool> filled(steps + 1, false);
  filled[0] = true;
  plan_.reserve(steps);
  plan_.push_back({steps, 0, 0, 0.0, 0.0, 1.0});
  filled[steps] = true;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const std::size_t i = order[k];
    std::size_t l = i;
    while (!filled[l]) --l;
    std::size_t r = i;
    while (!filled[r]) ++r;
    const double span = static_cast<double>(r - l);
    const double to_right = static_cast<double>(r - i);
    const double from_left = static_cast<double>(i - l);
    plan_.push_back({i, l, r, to_right / span, from_left / span,
                     std::sqrt(to_right * from_left / span * dt)});
    filled[i] = true;
  }
}

void BrownianBridge::increments(std::span<const double> v, std::span<double> out) const {
  if (v.size() != steps_ || out.size() != steps_)
    throw std::invalid_argument("bridge: expected M uniforms and M outputs");
  detail::Scratch<65> w(steps_ + 1);
  w[0] = 0.0;
  for (std::size_t k = 0; k < plan_.size(); ++k) {
    const Node& node = plan_[k];
    const double z = norm_quantile(v[k]);
    if (k == 0) {
      w[node.index] = z;
    } else {
      w[node.index] =
          node.left_weight * w[node.left] + node.right_weight * w[node.right] + node.stddev * z;
    }
  }
  for (std::size_t m = 1; m <= steps_; ++m) out[m - 1] = w[m] - w[m - 1];
}

void increments_forward(std::span<const double> v, std::span<double> out) {
  if (v.size() != out.size()) throw std::invalid_argument("forward: size mismatch");
  if (v.empty()) throw std::invalid_argument("forward: M must be at least 1");
  const double sd = std::sqrt(1.0 / static_cast<double>(v.size()));
  for (std::size_t m = 0; m < v.size(); ++m) out[m] = sd * norm_quantile(v[m]);
}

void increments_bridge(std::span<const double> v, std::span<double> out) {
  BrownianBridge(v.size()).increments(v, out);
}

void path_increments(const PathSpec& spec, const BrownianBridge* bridge, std::span<const double> v,
                     std::span<double> out) {
  if (spec.construction == PathConstruction::forward) {
    increments_forward(v, out);
    return;
  }
  if (bridge && bridge->steps() == spec.steps) {
    bridge->increments(v, out);
  } else {
    increments_bridge(v, out);
  }
}

}  // namespace sqmc
