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

#include "netcloak/ipv4.h"

#include <charconv>

namespace netcloak {

std::optional<Ipv4> Ipv4::Parse(std::string_view text) {
  uint32_t value = 0;
  int octets = 0;
  size_t pos = 0;
  while (true) {
    size_t end = text.find('.', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view part = text.substr(pos, end - pos);
    if (part.empty() || part.size() > 3) return std::nullopt;
    unsigned octet = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(),
                                     octet);
    if (ec != std::errc() || ptr != part.data() + part.size() || octet > 255) {
      return std::nullopt;
    }
    value = (value << 8) | octet;
    if (++octets > 4) return std::nullopt;
    if (end == text.size()) break;
    pos = end + 1;
  }
  if (octets != 4) return std::nullopt;
  return Ipv4(value);
}

std::string Ipv4::ToString() const {
  return std::to_string(value_ >> 24) + "." +
         std::to_string((value_ >> 16) & 0xff) + "." +
         std::to_string((value_ >> 8) & 0xff) + "." +
         std::to_string(value_ & 0xff);
}

uint32_t MaskFromLength(int length) {
  if (length <= 0) return 0;
  if (length >= 32) return 0xffffffffu;
  return ~((1u << (32 - length)) - 1);
}

std::optional<int> LengthFromMask(Ipv4 mask) {
  for (int length = 0; length <= 32; ++length) {
    if (MaskFromLength(length) == mask.value()) return length;
  }
  return std::nullopt;
}

std::optional<int> LengthFromWildcard(Ipv4 wildcard) {
  return LengthFromMask(Ipv4(~wildcard.value()));
}

Prefix::Prefix(Ipv4 address, int length)
    : network_(address.value() & MaskFromLength(length)), length_(length) {}

std::optional<Prefix> Prefix::Parse(std::string_view text) {
  size_t slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto address = Ipv4::Parse(text.substr(0, slash));
  if (!address) return std::nullopt;
  std::string_view len_text = text.substr(slash + 1);
  int length = 0;
  auto [ptr, ec] = std::from_chars(len_text.data(),
                                   len_text.data() + len_text.size(), length);
  if (ec != std::errc() || ptr != len_text.data() + len_text.size() ||
      len_text.empty() || length < 0 || length > 32) {
    return std::nullopt;
  }
  return Prefix(*address, length);
}

std::optional<Prefix> Prefix::FromMask(Ipv4 address, Ipv4 mask) {
  auto length = LengthFromMask(mask);
  if (!length) return std::nullopt;
  return Prefix(address, *length);
}

bool Prefix::Contains(Ipv4 address) const {
  return (address.value() & MaskFromLength(length_)) == network_.value();
}

bool Prefix::Contains(const Prefix& other) const {
  return other.length_ >= length_ && Contains(other.network_);
}

std::string Prefix::ToString() const {
  return network_.ToString() + "/" + std::to_string(length_);
}

}  // namespace netcloak
