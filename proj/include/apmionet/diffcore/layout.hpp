#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apmionet {

/// Input coordinate along which a derivative can be seeded.
enum class Direction : std::uint8_t { t = 0, x = 1, v = 2 };

std::string to_string(Direction d);

/// Which derivative components a hyper-dual scalar carries: up to three
/// first derivatives and the diagonal second derivatives along x and/or v.
///
/// Component order is fixed: value, then the first derivatives in seeding
/// order, then the second derivatives in declaration order.
class Layout {
 public:
  /// Value only.
  Layout() = default;

  /// Throws std::invalid_argument on duplicate directions, on a second
  /// derivative whose direction is not seeded, or on a (t,t) pair.
  Layout(std::initializer_list<Direction> first, std::initializer_list<Direction> second = {});
  Layout(std::span<const Direction> first, std::span<const Direction> second);

  /// Second pairs given explicitly; only (x,x) and (v,v) are accepted.
  static Layout from_pairs(std::span<const Direction> first,
                           std::span<const std::pair<Direction, Direction>> second_pairs);

  int n_first() const { return n_first_; }
  int n_second() const { return n_second_; }
  int components() const { return 1 + n_first_ + n_second_; }
  bool is_constant() const { return n_first_ == 0 && n_second_ == 0; }

  Direction first(int i) const { return first_[static_cast<std::size_t>(i)]; }
  /// Index (into the first-derivative list) that the k-th second derivative differentiates twice.
  int second_base(int k) const { return second_[static_cast<std::size_t>(k)]; }

  /// -1 when the direction is not tracked.
  int first_index(Direction d) const;
  int second_index(Direction d) const;

  bool operator==(const Layout& o) const;

 private:
  void build(std::span<const Direction> first, std::span<const Direction> second);

  std::array<Direction, 3> first_{};
  std::array<std::uint8_t, 2> second_{};
  std::uint8_t n_first_ = 0;
  std::uint8_t n_second_ = 0;
};

}  // namespace apmionet
