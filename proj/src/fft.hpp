#pragma once

// Thin RAII wrapper over FFTW's complex 1-D transforms. Internal to the library.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace rdbr::detail {

class FftPlan {
public:
    enum class Direction { forward, backward };

    FftPlan(std::size_t n, Direction dir) : n_(n) {
        if (n == 0) throw std::invalid_argument("FFT size must be positive");
        buf_ = fftw_alloc_complex(n);
        if (buf_ == nullptr) throw std::bad_alloc();
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_,
                                 dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
    }
    ~FftPlan() {
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    std::size_t size() const noexcept { return n_; }

    std::span<std::complex<double>> buffer() noexcept {
        return {reinterpret_cast<std::complex<double>*>(buf_), n_};
    }

    // Unnormalised in-place transform of buffer().
    void execute() noexcept { fftw_execute(plan_); }

private:
    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan plan_ = nullptr;
};

}  // namespace rdbr::detail
