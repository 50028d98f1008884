#include "search.hpp"

int binary_search(const std::vector<int>& xs, int target)
{
    int lo = 0;
    int hi = static_cast<int>(xs.size()) - 1;
    while (lo < hi) {
        int mid = lo + (hi - lo) / 2;
        if (xs[mid] == target)
            return mid;
        if (xs[mid] < target)
            lo = mid + 1;
        else
            hi = mid - 1;
    }
    return -1;
}
