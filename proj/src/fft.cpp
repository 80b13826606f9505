#include "afdm/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace afdm::fft {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// Plan cache shared by all threads. FFTW_UNALIGNED lets the plans run on
// arbitrary caller buffers via fftw_execute_dft.
class PlanCache {
public:
    PlanPair& get(int n) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        CVec a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
        auto* ap = reinterpret_cast<fftw_complex*>(a.data());
        auto* bp = reinterpret_cast<fftw_complex*>(b.data());
        PlanPair p;
        p.fwd = fftw_plan_dft_1d(n, ap, bp, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        p.bwd = fftw_plan_dft_1d(n, ap, bp, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p.fwd || !p.bwd) throw std::runtime_error("fftw plan creation failed");
        return plans_.emplace(n, p).first->second;
    }

private:
    std::mutex mutex_;
    std::unordered_map<int, PlanPair> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

}  // namespace

void transform(const cplx* in, cplx* out, int n_len, bool inverse) {
    if (n_len <= 0) throw std::invalid_argument("fft: length must be positive");
    // Plans are immutable once created; memoize the lookup per thread so the
    // hot path skips the shared-cache mutex.
    thread_local std::unordered_map<int, PlanPair*> local;
    PlanPair*& entry = local[n_len];
    if (entry == nullptr) entry = &cache().get(n_len);
    PlanPair& p = *entry;
    auto* ip = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in));
    auto* op = reinterpret_cast<fftw_complex*>(out);
    fftw_execute_dft(inverse ? p.bwd : p.fwd, ip, op);
}

CVec fft(const CVec& x) {
    CVec out(x.size());
    transform(x.data(), out.data(), static_cast<int>(x.size()), false);
    return out;
}

CVec ifft(const CVec& x) {
    CVec out(x.size());
    transform(x.data(), out.data(), static_cast<int>(x.size()), true);
    return out;
}

CVec fft_unitary(const CVec& x) {
    CVec out = fft(x);
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : out) v *= s;
    return out;
}

CVec ifft_unitary(const CVec& x) {
    CVec out = ifft(x);
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : out) v *= s;
    return out;
}

}  // namespace afdm::fft
