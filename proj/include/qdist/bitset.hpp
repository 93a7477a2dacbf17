#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <vector>

namespace qdist {

// Fixed-capacity bitset used for EP subsets in the schedulers. Keeps the hot
// operations (and-not, popcount, iteration) branch-light.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(int n) : n_(n), words_((n + 63) / 64, 0) {}

  static Bitset full(int n) {
    Bitset b(n);
    for (int w = 0; w < static_cast<int>(b.words_.size()); ++w) b.words_[w] = ~0ULL;
    b.trim();
    return b;
  }

  int capacity() const { return n_; }

  bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
  void set(int i) { words_[i >> 6] |= 1ULL << (i & 63); }
  void reset(int i) { words_[i >> 6] &= ~(1ULL << (i & 63)); }

  bool any() const {
    for (std::uint64_t w : words_)
      if (w) return true;
    return false;
  }

  bool none() const { return !any(); }

  int count() const {
    int c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  int first() const {
    for (int w = 0; w < static_cast<int>(words_.size()); ++w)
      if (words_[w]) return w * 64 + std::countr_zero(words_[w]);
    return -1;
  }

  bool intersects(const Bitset& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & o.words_[w]) return true;
    return false;
  }

  bool is_subset_of(const Bitset& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~o.words_[w]) return false;
    return true;
  }

  Bitset& operator&=(const Bitset& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
    return *this;
  }

  Bitset& operator|=(const Bitset& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }

  // this &= ~o
  Bitset& subtract(const Bitset& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~o.words_[w];
    return *this;
  }

  friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
  friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
  friend Bitset and_not(Bitset a, const Bitset& b) { return a.subtract(b); }

  bool operator==(const Bitset& o) const { return n_ == o.n_ && words_ == o.words_; }

  template <class F>
  void for_each(F&& f) const {
    for (int w = 0; w < static_cast<int>(words_.size()); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        int i = w * 64 + std::countr_zero(bits);
        bits &= bits - 1;
        f(i);
      }
    }
  }

  std::vector<int> to_vector() const {
    std::vector<int> v;
    v.reserve(count());
    for_each([&](int i) { v.push_back(i); });
    return v;
  }

  // Stable for use as a hash-map key.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t w : words_) {
      h ^= w;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  void trim() {
    if (n_ % 64 != 0 && !words_.empty()) words_.back() &= (1ULL << (n_ % 64)) - 1;
  }

  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace qdist
