#include "pointsim/names.hpp"

#include "pointsim/hash.hpp"

#include <cstdio>

namespace pointsim::pce {

std::string
ContentName::to_string() const
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%016llx/%016llx", static_cast<unsigned long long>(scope),
                static_cast<unsigned long long>(item));
  return buf;
}

std::uint64_t
scope_id(std::string_view text)
{
  const std::uint64_t h = fnv1a64(text);
  return h == 0 ? 1 : h;
}

ContentName
http_name(std::string_view host, std::string_view path)
{
  const std::uint64_t item = fnv1a64(path);
  return {scope_id(host), item == 0 ? 1 : item};
}

ContentName
channel_name(std::string_view group_address)
{
  return {scope_id(group_address), 1};
}

} // namespace pointsim::pce
