#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace romkit {

// 64-bit FNV-1a, streaming.
class Fnv1a
{
public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  Fnv1a() = default;
  explicit Fnv1a(std::uint64_t state) : state_(state) {}

  Fnv1a& update(const void* data, std::size_t size)
  {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= kPrime;
    }
    return *this;
  }

  Fnv1a& update(std::string_view s) { return update(s.data(), s.size()); }

  template <typename T>
  Fnv1a& update_value(const T& value)
  {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    return update(bytes, sizeof(T));
  }

  std::uint64_t digest() const { return state_; }

private:
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a(const void* data, std::size_t size)
{
  return Fnv1a().update(data, size).digest();
}

} // namespace romkit
