#pragma once

namespace hubsim {
inline constexpr const char* kHubsimVersion = "0.1.0";
}
