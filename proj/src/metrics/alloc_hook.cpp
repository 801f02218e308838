// Allocation accounting by interposing the C allocator. Linked into executables only; the metrics
// library finds it through a weak reference to sb_alloc_net_bytes().

#include <malloc.h>

#include <atomic>
#include <cerrno>
#include <cstddef>
#include <cstdint>

extern "C" {
void* __libc_malloc(std::size_t);
void __libc_free(void*);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
void* __libc_valloc(std::size_t);
void* __libc_pvalloc(std::size_t);
}

namespace {

std::atomic<long long> g_net{0};

inline void* track(void* p) {
  if (p) g_net.fetch_add(static_cast<long long>(malloc_usable_size(p)), std::memory_order_relaxed);
  return p;
}

inline void untrack(void* p) {
  if (p) g_net.fetch_sub(static_cast<long long>(malloc_usable_size(p)), std::memory_order_relaxed);
}

}  // namespace

extern "C" {

__attribute__((visibility("default"))) long long sb_alloc_net_bytes() {
  return g_net.load(std::memory_order_relaxed);
}

__attribute__((visibility("default"))) void* malloc(std::size_t n) { return track(__libc_malloc(n)); }

__attribute__((visibility("default"))) void free(void* p) {
  untrack(p);
  __libc_free(p);
}

__attribute__((visibility("default"))) void* calloc(std::size_t n, std::size_t size) {
  return track(__libc_calloc(n, size));
}

__attribute__((visibility("default"))) void* realloc(void* p, std::size_t n) {
  const long long old = p ? static_cast<long long>(malloc_usable_size(p)) : 0;
  void* q = __libc_realloc(p, n);
  if (q) {
    g_net.fetch_add(static_cast<long long>(malloc_usable_size(q)) - old, std::memory_order_relaxed);
  } else if (n == 0 && p) {
    g_net.fetch_sub(old, std::memory_order_relaxed);
  }
  return q;
}

__attribute__((visibility("default"))) void* memalign(std::size_t align, std::size_t n) {
  return track(__libc_memalign(align, n));
}

__attribute__((visibility("default"))) void* aligned_alloc(std::size_t align, std::size_t n) {
  return track(__libc_memalign(align, n));
}

__attribute__((visibility("default"))) int posix_memalign(void** out, std::size_t align, std::size_t n) {
  if (align < sizeof(void*) || (align & (align - 1)) != 0) return EINVAL;
  void* p = __libc_memalign(align, n);
  if (!p) return ENOMEM;
  *out = track(p);
  return 0;
}

__attribute__((visibility("default"))) void* valloc(std::size_t n) { return track(__libc_valloc(n)); }

__attribute__((visibility("default"))) void* pvalloc(std::size_t n) { return track(__libc_pvalloc(n)); }

}
