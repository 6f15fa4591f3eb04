// Copyright 2026 The NetCloak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// -----------------------------------------------------------------------------
// File: ipv4.h
// -----------------------------------------------------------------------------
//
// Minimal IPv4 address and prefix value types used by the configuration model,
// the simulator and configuration generation.

#ifndef NETCLOAK_IPV4_H_
#define NETCLOAK_IPV4_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace netcloak {

class Ipv4 {
 public:
  constexpr Ipv4() = default;
  constexpr explicit Ipv4(uint32_t value) : value_(value) {}

  // Parses dotted-quad notation. Returns nullopt on any syntax error.
  static std::optional<Ipv4> Parse(std::string_view text);

  constexpr uint32_t value() const { return value_; }
  std::string ToString() const;

  friend constexpr auto operator<=>(Ipv4, Ipv4) = default;

 private:
  uint32_t value_ = 0;
};

// Converts between prefix lengths and dotted masks / wildcards.
uint32_t MaskFromLength(int length);
// Returns nullopt if `mask` is not a contiguous netmask.
std::optional<int> LengthFromMask(Ipv4 mask);
// Returns nullopt if `wildcard` is not the complement of a contiguous netmask.
std::optional<int> LengthFromWildcard(Ipv4 wildcard);

class Prefix {
 public:
  constexpr Prefix() = default;
  // Masks host bits of `address`.
  Prefix(Ipv4 address, int length);

  // Parses "a.b.c.d/len".
  static std::optional<Prefix> Parse(std::string_view text);
  // Builds from an address and a dotted mask, returning nullopt on a
  // non-contiguous mask.
  static std::optional<Prefix> FromMask(Ipv4 address, Ipv4 mask);

  Ipv4 network() const { return network_; }
  int length() const { return length_; }
  Ipv4 mask() const { return Ipv4(MaskFromLength(length_)); }
  Ipv4 wildcard() const { return Ipv4(~MaskFromLength(length_)); }

  bool Contains(Ipv4 address) const;
  bool Contains(const Prefix& other) const;
  std::string ToString() const;

  friend auto operator<=>(const Prefix&, const Prefix&) = default;

 private:
  Ipv4 network_;
  int length_ = 0;
};

}  // namespace netcloak

#endif  // NETCLOAK_IPV4_H_
