#include "qosc/spectral.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

#include "qosc/error.hpp"

namespace qosc::spectral {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int dim, int n, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(dim, n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        std::size_t total = 1;
        int dims[3] = {n, n, n};
        for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
        auto* buf = fftw_alloc_complex(total);
        fftw_plan plan = fftw_plan_dft(dim, dims, buf, buf, sign, FFTW_ESTIMATE);
        fftw_free(buf);
        if (!plan) throw Error("FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

struct Scratch {
    fftw_complex* data = nullptr;
    std::size_t size = 0;

    ~Scratch() { fftw_free(data); }

    fftw_complex* reserve(std::size_t n) {
        if (n > size) {
            fftw_free(data);
            data = fftw_alloc_complex(n);
            if (!data) throw Error("FFTW failed to allocate a buffer");
            size = n;
        }
        return data;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run(const KGrid& grid, std::span<cplx> data, int sign) {
    if (data.size() != grid.size()) throw DomainError("transform buffer does not match grid size");
    // Plans are made for FFTW-aligned memory, so every transform runs in an aligned scratch
    // buffer; the result then does not depend on where the caller's data happens to sit.
    thread_local Scratch scratch;
    fftw_complex* buf = scratch.reserve(data.size());
    std::memcpy(buf, data.data(), data.size() * sizeof(cplx));
    fftw_execute_dft(cache().get(grid.dim(), grid.n_points(), sign), buf, buf);
    std::memcpy(data.data(), buf, data.size() * sizeof(cplx));
}

}  // namespace

void forward(const KGrid& grid, std::span<cplx> data) { run(grid, data, FFTW_FORWARD); }

void inverse(const KGrid& grid, std::span<cplx> data) {
    run(grid, data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& v : data) v *= scale;
}

}  // namespace qosc::spectral
