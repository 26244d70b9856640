#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <vector>

namespace roboost {

using Point = std::size_t;

/// Dense bitset over the points 0..universe-1 of a finite instance space.
class PointSet {
public:
  class const_iterator {
  public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = Point;
    using difference_type = std::ptrdiff_t;
    using pointer = const Point*;
    using reference = Point;

    const_iterator() = default;
    const_iterator(const PointSet* set, std::size_t word) : set_(set), word_(word) {
      if (set_ != nullptr && word_ < set_->words_.size()) {
        bits_ = set_->words_[word_];
        advance();
      }
    }

    Point operator*() const noexcept { return word_ * 64 + static_cast<std::size_t>(std::countr_zero(bits_)); }

    const_iterator& operator++() {
      bits_ &= bits_ - 1;
      advance();
      return *this;
    }
    const_iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }

    bool operator==(const const_iterator& other) const noexcept {
      return word_ == other.word_ && bits_ == other.bits_;
    }

  private:
    void advance() {
      while (bits_ == 0) {
        ++word_;
        if (word_ >= set_->words_.size()) {
          word_ = set_->words_.size();
          return;
        }
        bits_ = set_->words_[word_];
      }
    }

    const PointSet* set_ = nullptr;
    std::size_t word_ = 0;
    std::uint64_t bits_ = 0;
  };

  PointSet() = default;
  explicit PointSet(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}

  static PointSet full(std::size_t universe) {
    PointSet s(universe);
    for (auto& w : s.words_) w = ~std::uint64_t{0};
    s.trim();
    return s;
  }

  static PointSet of(std::size_t universe, std::initializer_list<Point> points) {
    PointSet s(universe);
    for (Point p : points) s.insert(p);
    return s;
  }

  template <class Range>
  static PointSet from_range(std::size_t universe, const Range& points) {
    PointSet s(universe);
    for (Point p : points) s.insert(p);
    return s;
  }

  std::size_t universe() const noexcept { return universe_; }

  bool contains(Point p) const noexcept {
    return p < universe_ && ((words_[p / 64] >> (p % 64)) & 1U) != 0;
  }

  void insert(Point p) { words_.at(p / 64) |= std::uint64_t{1} << (p % 64); }
  void erase(Point p) { words_.at(p / 64) &= ~(std::uint64_t{1} << (p % 64)); }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool empty() const noexcept {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }

  bool intersects(const PointSet& other) const noexcept {
    const auto n = std::min(words_.size(), other.words_.size());
    for (std::size_t i = 0; i < n; ++i)
      if ((words_[i] & other.words_[i]) != 0) return true;
    return false;
  }

  bool is_subset_of(const PointSet& other) const noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      const auto theirs = i < other.words_.size() ? other.words_[i] : 0;
      if ((words_[i] & ~theirs) != 0) return false;
    }
    return true;
  }

  PointSet& operator|=(const PointSet& other) {
    for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }
  PointSet& operator&=(const PointSet& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= i < other.words_.size() ? other.words_[i] : 0;
    return *this;
  }
  PointSet& operator-=(const PointSet& other) {
    for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
  }

  friend PointSet operator|(PointSet a, const PointSet& b) { return a |= b; }
  friend PointSet operator&(PointSet a, const PointSet& b) { return a &= b; }
  friend PointSet operator-(PointSet a, const PointSet& b) { return a -= b; }

  PointSet complement() const {
    PointSet s = *this;
    for (auto& w : s.words_) w = ~w;
    s.trim();
    return s;
  }

  bool operator==(const PointSet& other) const = default;

  const_iterator begin() const { return const_iterator(this, 0); }
  const_iterator end() const { return const_iterator(this, words_.size()); }

  std::vector<Point> to_vector() const { return {begin(), end()}; }

private:
  void trim() {
    if (universe_ % 64 != 0 && !words_.empty())
      words_.back() &= (std::uint64_t{1} << (universe_ % 64)) - 1;
  }

  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace roboost
