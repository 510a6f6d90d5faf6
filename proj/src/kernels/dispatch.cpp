#include <atomic>
#include <cstdlib>

#include "lolo/kernels.hpp"

namespace lolo::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* find(std::string_view name) {
    for (const KernelTable* t : available())
        if (t->name == name) return t;
    return nullptr;
}

const KernelTable* initial_choice() {
    if (const char* env = std::getenv("LOLO_DCV_KERNEL")) {
        if (const KernelTable* t = find(env)) return t;
    }
    return available().back();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> slot{initial_choice()};
    return slot;
}

}  // namespace

std::vector<const KernelTable*> available() {
    std::vector<const KernelTable*> out{&scalar::table()};
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) out.push_back(&avx2::table());
#endif
#if defined(__aarch64__)
    out.push_back(&neon::table());
#endif
    return out;
}

const KernelTable& active() {
    return *current().load(std::memory_order_acquire);
}

bool select(std::string_view name) {
    const KernelTable* t = find(name);
    if (t == nullptr) return false;
    current().store(t, std::memory_order_release);
    return true;
}

}  // namespace lolo::kernels
