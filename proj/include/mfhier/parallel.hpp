#pragma once

// Parallel drivers for independent work items (simulation replications, CV
// windows, tuning-grid cells). Every driver keeps a serial path; tests check
// that both produce identical results.

#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <omp.h>

namespace mfhier {

enum class Exec { Serial, Parallel };

struct ExecPolicy {
    Exec mode = Exec::Parallel;
    int threads = 0;  // 0: MFHIER_THREADS or the OpenMP default

    static ExecPolicy serial() { return {Exec::Serial, 1}; }
};

inline int default_threads() {
    if (const char* env = std::getenv("MFHIER_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return omp_get_max_threads();
}

/// Calls f(i) for i in [0, n). The first exception by index is rethrown.
template <class F>
void for_each_index(int n, F&& f, const ExecPolicy& policy = {}) {
    if (policy.mode == Exec::Serial || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const int threads = policy.threads > 0 ? policy.threads : default_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

template <class T, class F>
std::vector<T> map_indices(int n, F&& f, const ExecPolicy& policy = {}) {
    std::vector<T> out(n);
    for_each_index(n, [&](int i) { out[i] = f(i); }, policy);
    return out;
}

}  // namespace mfhier
