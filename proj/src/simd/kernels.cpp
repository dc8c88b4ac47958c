#include "advgeo/simd/kernels.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

#include "simd/kernel_impls.hpp"

namespace advgeo::simd {
namespace {

bool cpu_has_avx2() {
#if defined(ADVGEO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> slot{best_available_isa()};
    return slot;
}

}  // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
    }
    return "unknown";
}

Isa isa_from_string(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    throw std::invalid_argument("unknown instruction set '" + std::string(name) + "'");
}

bool isa_available(Isa isa) {
    static const bool avx2 = cpu_has_avx2();
    return isa == Isa::scalar || (isa == Isa::avx2 && avx2);
}

Isa best_available_isa() {
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_available(isa)) {
        throw std::invalid_argument("instruction set '" + std::string(to_string(isa)) +
                                    "' is not available on this CPU");
    }
    active_slot().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernel_table(Isa isa) {
    if (!isa_available(isa)) {
        throw std::invalid_argument("instruction set '" + std::string(to_string(isa)) +
                                    "' is not available on this CPU");
    }
#if defined(ADVGEO_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::avx2_kernels();
#endif
    return detail::scalar_kernels();
}

const KernelTable& active_kernels() { return kernel_table(active_isa()); }

}  // namespace advgeo::simd
