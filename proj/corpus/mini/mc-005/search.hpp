#pragma once

#include <vector>

int binary_search(const std::vector<int>& xs, int target);
