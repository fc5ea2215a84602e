#pragma once

#include <string>

#include "maip/domain.hpp"

namespace maip {

/// Serializes a domain to its JSON text form (keys sorted, 2-space indent,
/// byte-stable across runs).  Requires rule-table dynamics; programmatic
/// dynamics cannot be serialized and raise ValidationError.
std::string domain_to_json(const Domain& domain);

/// Parses a domain from JSON text.  `origin` names the source in error
/// messages.  Raises ValidationError with a JSON-path location on malformed
/// or missing fields, and with the full issue list when the assembled domain
/// fails validation.
Domain load_domain_json(const std::string& text,
                        const std::string& origin = "<string>");

/// File variants of the above.
Domain load_domain(const std::string& path);
void save_domain(const Domain& domain, const std::string& path);

}  // namespace maip
