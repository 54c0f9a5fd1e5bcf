#pragma once

#include <array>
#include <string>
#include <string_view>

#include "personae/util/text.hpp"

namespace personae::retrieval {

namespace detail {

// Multi-label public suffixes common in practice. Single-label TLDs are
// handled generically; this list only needs suffixes with a dot in them.
inline constexpr std::array<std::string_view, 40> kCompoundSuffixes = {
    "co.uk",  "ac.uk",  "gov.uk", "org.uk", "ltd.uk", "plc.uk", "me.uk",  "nhs.uk",
    "com.au", "net.au", "org.au", "edu.au", "gov.au", "co.nz",  "org.nz", "ac.nz",
    "govt.nz", "co.jp", "ac.jp",  "go.jp",  "or.jp",  "ne.jp",  "com.br", "gov.br",
    "org.br", "edu.br", "com.cn", "edu.cn", "gov.cn", "org.cn", "ac.in",  "co.in",
    "gov.in", "co.za",  "ac.za",  "gov.za", "com.mx", "gob.mx", "co.kr",  "ac.kr",
};

inline bool is_compound_suffix(std::string_view s) {
    for (auto suffix : kCompoundSuffixes)
        if (s == suffix) return true;
    return false;
}

} // namespace detail

/// Host part of a URL, lowercased, without credentials, port or "www.".
inline std::string host_of(std::string_view url) {
    auto scheme = url.find("://");
    if (scheme != std::string_view::npos) url.remove_prefix(scheme + 3);
    auto end = url.find_first_of("/?#");
    if (end != std::string_view::npos) url = url.substr(0, end);
    auto at = url.rfind('@');
    if (at != std::string_view::npos) url.remove_prefix(at + 1);
    auto colon = url.find(':');
    if (colon != std::string_view::npos) url = url.substr(0, colon);
    while (!url.empty() && url.back() == '.') url.remove_suffix(1);
    auto host = text::to_lower(url);
    if (host.rfind("www.", 0) == 0) host.erase(0, 4);
    return host;
}

/// Registrable domain (public suffix plus one label) of a host or URL:
/// "https://www.jpl.nasa.gov/news" -> "nasa.gov", "news.bbc.co.uk" -> "bbc.co.uk".
inline std::string registrable_domain(std::string_view host_or_url) {
    std::string host = host_of(host_or_url);
    auto last = host.rfind('.');
    if (last == std::string::npos) return host;
    auto second = host.rfind('.', last - 1);
    if (second == std::string::npos) return host;
    std::string_view tail2 = std::string_view(host).substr(second + 1);
    if (detail::is_compound_suffix(tail2)) {
        auto third = second == 0 ? std::string::npos : host.rfind('.', second - 1);
        return third == std::string::npos ? host : host.substr(third + 1);
    }
    return host.substr(second + 1);
}

} // namespace personae::retrieval
