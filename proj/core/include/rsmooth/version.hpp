#pragma once

#include <string_view>

namespace rsmooth {

std::string_view library_version();

}  // namespace rsmooth
