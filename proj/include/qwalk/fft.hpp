#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

// In-place N-point complex DFT pair:
//   forward:  X_m = sum_j x_j exp(-2 pi i j m / N)
//   inverse:  x_j = (1/N) sum_m X_m exp(+2 pi i j m / N)
//
// Plans use FFTW_ESTIMATE so the chosen algorithm (and the rounding) does not
// depend on timing measurements. Planning is serialized; execution on distinct
// arrays is safe from any thread.
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n == 0) throw SizeError("FFT size must be positive");
        auto* buf = fftw_alloc_complex(n);
        if (buf == nullptr) throw ResourceError("FFT buffer allocation failed");
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            const int ni = static_cast<int>(n);
            fwd_ = fftw_plan_dft_1d(ni, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
            bwd_ = fftw_plan_dft_1d(ni, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        }
        fftw_free(buf);
        if (fwd_ == nullptr || bwd_ == nullptr) {
            destroy();
            throw ResourceError("FFTW planning failed");
        }
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&& o) noexcept : n_(o.n_), fwd_(o.fwd_), bwd_(o.bwd_) { o.fwd_ = o.bwd_ = nullptr; }
    Fft& operator=(Fft&& o) noexcept {
        if (this != &o) {
            destroy();
            n_ = o.n_;
            fwd_ = o.fwd_;
            bwd_ = o.bwd_;
            o.fwd_ = o.bwd_ = nullptr;
        }
        return *this;
    }
    ~Fft() { destroy(); }

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<std::complex<double>> data) const {
        check(data);
        fftw_execute_dft(fwd_, as_fftw(data), as_fftw(data));
    }

    void inverse(std::span<std::complex<double>> data) const {
        check(data);
        fftw_execute_dft(bwd_, as_fftw(data), as_fftw(data));
        const double inv = 1.0 / static_cast<double>(n_);
        for (auto& v : data) v *= inv;
    }

private:
    static fftw_complex* as_fftw(std::span<std::complex<double>> d) {
        return reinterpret_cast<fftw_complex*>(d.data());
    }
    void check(std::span<std::complex<double>> d) const {
        if (d.size() != n_) throw SizeError("FFT input length does not match plan size");
    }
    void destroy() noexcept {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
        fwd_ = bwd_ = nullptr;
    }

    std::size_t n_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

// Smallest 2^a 3^b 5^c >= n.
inline std::size_t good_fft_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t p : {2u, 3u, 5u}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return m;
    }
}

}  // namespace qwalk
