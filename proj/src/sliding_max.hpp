#pragma once

#include <cstddef>
#include <vector>

namespace sparsedom::detail {

// Monotone (non-increasing) deque of indices into an external array; the
// front is always the arg-max of the live window.
class SlidingMax {
public:
    explicit SlidingMax(std::size_t capacity) : idx_(capacity) {}

    void reset() noexcept { head_ = tail_ = 0; }

    template <typename Values>
    void push(const Values& v, std::ptrdiff_t i) {
        while (tail_ > head_ && v[idx_[tail_ - 1]] <= v[i]) --tail_;
        idx_[tail_++] = i;
    }
    void evict_before(std::ptrdiff_t first) noexcept {
        while (tail_ > head_ && idx_[head_] < first) ++head_;
    }
    [[nodiscard]] bool empty() const noexcept { return tail_ == head_; }
    [[nodiscard]] std::ptrdiff_t front() const noexcept { return idx_[head_]; }

private:
    std::vector<std::ptrdiff_t> idx_;
    std::size_t head_ = 0, tail_ = 0;
};

// out[x] = max over i in [x - len + 1, x] ∩ [0, count) of in[i], for x in [0, n).
template <typename In, typename Out>
void window_cover_max(const In& in, std::ptrdiff_t count, std::ptrdiff_t len, std::ptrdiff_t n, Out& out,
                      SlidingMax& q) {
    q.reset();
    for (std::ptrdiff_t x = 0; x < n; ++x) {
        if (x < count) q.push(in, x);
        q.evict_before(x - len + 1);
        out[x] = in[q.front()];
    }
}

}  // namespace sparsedom::detail
