#include "qshuttle/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace qshuttle::kernels {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const Table& select() {
    const char* env = std::getenv("QSHUTTLE_ISA");
    if (env && std::string_view(env) == "scalar") return scalar();
    if (avx2() && cpu_has_avx2()) return *avx2();
    return scalar();
}

}  // namespace

const Table& active() {
    static const Table& table = select();
    return table;
}

}  // namespace qshuttle::kernels
