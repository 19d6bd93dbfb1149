#pragma once

#include <cstddef>
#include <vector>

namespace pwr {

using MultiIndex = std::vector<int>;

struct MultiIndexSet {
  std::size_t dims = 0;
  std::vector<int> caps;
  int total = 0;
  std::vector<MultiIndex> members;  // lexicographic, constant first

  std::size_t size() const { return members.size(); }
  // position of d, or -1
  std::ptrdiff_t find(const MultiIndex& d) const;
};

MultiIndexSet make_multi_index_set(std::size_t dims, const std::vector<int>& caps, int total);

}  // namespace pwr
