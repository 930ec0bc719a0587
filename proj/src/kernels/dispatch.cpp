#include "chromafool/kernels.hpp"

#include <atomic>

namespace chromafool::kernels {

#if defined(CHROMAFOOL_HAVE_AVX2)
const KernelTable& avx2_table_impl();
#endif

const KernelTable* avx2_table() {
#if defined(CHROMAFOOL_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* best_table() {
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) {
  const KernelTable* t = isa == Isa::Avx2 ? avx2_table() : &scalar_table();
  if (t == nullptr) return false;
  current().store(t, std::memory_order_release);
  return true;
}

Isa active_isa() { return &active() == &scalar_table() ? Isa::Scalar : Isa::Avx2; }

}  // namespace chromafool::kernels
