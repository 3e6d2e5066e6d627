#include "apmionet/diffcore/layout.hpp"

#include <stdexcept>

namespace apmionet {

std::string to_string(Direction d) {
  switch (d) {
    case Direction::t: return "t";
    case Direction::x: return "x";
    case Direction::v: return "v";
  }
  return "?";
}

Layout::Layout(std::initializer_list<Direction> first, std::initializer_list<Direction> second) {
  build(std::span<const Direction>(first.begin(), first.size()),
        std::span<const Direction>(second.begin(), second.size()));
}

Layout::Layout(std::span<const Direction> first, std::span<const Direction> second) {
  build(first, second);
}

Layout Layout::from_pairs(std::span<const Direction> first,
                          std::span<const std::pair<Direction, Direction>> second_pairs) {
  std::vector<Direction> diag;
  for (const auto& [a, b] : second_pairs) {
    if (a != b) {
      throw std::invalid_argument("mixed second derivative (" + to_string(a) + "," + to_string(b) +
                                  ") is not supported");
    }
    diag.push_back(a);
  }
  return Layout(first, diag);
}

void Layout::build(std::span<const Direction> first, std::span<const Direction> second) {
  if (first.size() > 3) throw std::invalid_argument("at most three seeded directions");
  if (second.size() > 2) throw std::invalid_argument("at most two second-derivative pairs");
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (first[i] == first[j]) {
        throw std::invalid_argument("duplicate seeded direction " + to_string(first[i]));
      }
    }
    first_[i] = first[i];
  }
  n_first_ = static_cast<std::uint8_t>(first.size());
  for (std::size_t k = 0; k < second.size(); ++k) {
    const Direction d = second[k];
    if (d == Direction::t) throw std::invalid_argument("second pair (t,t) is not supported");
    for (std::size_t j = 0; j < k; ++j) {
      if (second[j] == d) throw std::invalid_argument("duplicate second pair " + to_string(d));
    }
    const int base = first_index(d);
    if (base < 0) {
      throw std::invalid_argument("second pair (" + to_string(d) + "," + to_string(d) +
                                  ") on an unseeded direction");
    }
    second_[k] = static_cast<std::uint8_t>(base);
  }
  n_second_ = static_cast<std::uint8_t>(second.size());
}

int Layout::first_index(Direction d) const {
  for (int i = 0; i < n_first_; ++i) {
    if (first_[static_cast<std::size_t>(i)] == d) return i;
  }
  return -1;
}

int Layout::second_index(Direction d) const {
  for (int k = 0; k < n_second_; ++k) {
    if (first_[second_[static_cast<std::size_t>(k)]] == d) return k;
  }
  return -1;
}

bool Layout::operator==(const Layout& o) const {
  if (n_first_ != o.n_first_ || n_second_ != o.n_second_) return false;
  for (int i = 0; i < n_first_; ++i) {
    if (first_[static_cast<std::size_t>(i)] != o.first_[static_cast<std::size_t>(i)]) return false;
  }
  for (int k = 0; k < n_second_; ++k) {
    if (second_[static_cast<std::size_t>(k)] != o.second_[static_cast<std::size_t>(k)]) return false;
  }
  return true;
}

}  // namespace apmionet
