#pragma once

// Fixed-size buffer randomizer: holds B pending items, emits a uniformly
// drawn slot per step and backfills it with the next input. Turns a
// structured sequence into an approximately exchangeable one while keeping
// memory bounded. The output is always an exact permutation of the input.
//
// For i <= B the emitted index law is P(out_k = in_i) = (1/B)(1-1/B)^(k-1);
// for B < i <= B+k-1 it is (1/B)(1-1/B)^(k-1+B-i).

#include "streamthin/rng.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace streamthin {

template <typename T>
class ScrambleBuffer {
public:
    ScrambleBuffer(std::size_t capacity, Rng rng)
        : capacity_(capacity == 0 ? 1 : capacity), rng_(std::move(rng)) {
        slots_.reserve(capacity_);
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t pending() const { return slots_.size(); }

    // Feed-then-draw step. While warming up (fewer than B items buffered and
    // an input present) the item is swallowed and nothing is emitted.
    // Once full, a uniform slot is emitted and the incoming item takes its
    // place, so an item never passes straight through a full buffer.
    // With `incoming` absent, drains one slot per call, without replacement.
    std::optional<T> next(std::optional<T> incoming) {
        if (incoming.has_value()) {
            if (slots_.size() < capacity_) {
                slots_.push_back(std::move(*incoming));
                return std::nullopt;
            }
            std::size_t j = rng_.integer(slots_.size());
            T out = std::move(slots_[j]);
            slots_[j] = std::move(*incoming);
            return out;
        }
        if (slots_.empty()) return std::nullopt;
        std::size_t j = rng_.integer(slots_.size());
        T out = std::move(slots_[j]);
        slots_[j] = std::move(slots_.back());
        slots_.pop_back();
        return out;
    }

private:
    std::size_t capacity_;
    std::vector<T> slots_;
    Rng rng_;
};

// Convenience for offline inputs: the scrambled order as an index permutation.
inline std::vector<std::size_t> scramble_indices(std::size_t count, std::size_t capacity,
                                                 Rng rng) {
    ScrambleBuffer<std::size_t> buf(capacity, std::move(rng));
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (auto v = buf.next(i)) out.push_back(*v);
    }
    while (auto v = buf.next(std::nullopt)) out.push_back(*v);
    return out;
}

}  // namespace streamthin
