#pragma once

#include <string>

namespace text {
std::string reverse_words(const std::string& line);
}
