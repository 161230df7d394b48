#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace pointsim::pce {

/// (scope, item) name of a published information item. item == 0 names the
/// whole scope; a publisher registered on a scope root serves every item in it.
struct ContentName {
  std::uint64_t scope = 0;
  std::uint64_t item = 0;

  static ContentName scope_root(std::uint64_t scope) { return {scope, 0}; }
  bool is_scope_root() const noexcept { return item == 0; }
  ContentName root() const noexcept { return {scope, 0}; }
  std::string to_string() const;

  friend auto operator<=>(const ContentName&, const ContentName&) = default;
};

/// Scope id of an HTTP authority or multicast group string (never 0).
std::uint64_t scope_id(std::string_view text);

/// HTTP resource: scope = hash(host), item = hash(path).
ContentName http_name(std::string_view host, std::string_view path);

/// IPTV channel: scope = hash(group address), single item 1.
ContentName channel_name(std::string_view group_address);

} // namespace pointsim::pce
