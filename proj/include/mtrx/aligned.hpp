// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fftw3.h>

#include <cstddef>
#include <new>
#include <vector>

namespace mtrx {

/// Allocator handing out FFTW-aligned storage so that every Field and
/// Spectrum can be transformed in place of the planning buffers. Elements are
/// default-initialized (left indeterminate for doubles) unless a value is
/// given.
template <class T>
struct FftwAllocator {
  using value_type = T;

  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

  template <class U>
  void construct(U* p) noexcept {
    ::new (static_cast<void*>(p)) U;
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }

  template <class U>
  friend bool operator==(const FftwAllocator&, const FftwAllocator<U>&) noexcept { return true; }
};

template <class T>
using AlignedVector = std::vector<T, FftwAllocator<T>>;

} // namespace mtrx
