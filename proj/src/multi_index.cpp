#include "pwr/multi_index.hpp"

#include <algorithm>

#include "pwr/error.hpp"

namespace pwr {

MultiIndexSet make_multi_index_set(std::size_t dims, const std::vector<int>& caps, int total) {
  if (dims == 0) throw Error(ErrorKind::invalid_argument, "multi-index set needs dims >= 1");
  if (caps.size() != dims) throw Error(ErrorKind::length_mismatch, "one order cap per dimension required");
  if (total < 0 || std::any_of(caps.begin(), caps.end(), [](int c) { return c < 0; }))
    throw Error(ErrorKind::invalid_argument, "order caps must be nonnegative");

  MultiIndexSet set;
  set.dims = dims;
  set.caps = caps;
  set.total = total;

  // odometer over the box, last dimension fastest, pruned by the total cap
  MultiIndex d(dims, 0);
  int sum = 0;
  while (true) {
    set.members.push_back(d);
    std::size_t k = dims;
    while (k > 0) {
      --k;
      if (d[k] < caps[k] && sum < total) {
        ++d[k];
        ++sum;
        break;
      }
      sum -= d[k];
      d[k] = 0;
      if (k == 0) return set;
    }
  }
}

std::ptrdiff_t MultiIndexSet::find(const MultiIndex& d) const {
  auto it = std::lower_bound(members.begin(), members.end(), d);
  if (it == members.end() || *it != d) return -1;
  return it - members.begin();
}

}  // namespace pwr
