#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace trackrl {

// Fixed-capacity FIFO ring: once full, each push overwrites the oldest item.
template <class T>
class ReplayMemory {
 public:
  static constexpr std::size_t kDefaultCapacity = 45000;

  explicit ReplayMemory(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
    items_.reserve(std::min<std::size_t>(capacity, 4096));
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool full() const { return items_.size() == capacity_; }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[cursor_] = std::move(item);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  // i = 0 is the oldest stored element.
  const T& at(std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("replay index out of range");
    if (items_.size() < capacity_) return items_[i];
    return items_[(cursor_ + i) % capacity_];
  }

  // m independent uniform draws with replacement.
  template <class Rng>
  std::vector<const T*> sample(std::size_t m, Rng& rng) const {
    if (items_.size() < m || m == 0) {
      throw std::invalid_argument("cannot sample " + std::to_string(m) +
                                  " transitions from replay memory of size " +
                                  std::to_string(items_.size()));
    }
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const T*> batch;
    batch.reserve(m);
    for (std::size_t i = 0; i < m; ++i) batch.push_back(&items_[pick(rng)]);
    return batch;
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<T> items_;
};

}  // namespace trackrl
