#pragma once

#define BENCHAUDIT_VERSION "1.0.0"

namespace benchaudit {

inline const char *version() { return BENCHAUDIT_VERSION; }

} // namespace benchaudit
