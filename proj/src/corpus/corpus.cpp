#include "corpus_entries.hpp"

namespace gevo {

const std::vector<CorpusOps>& corpus() {
  static const std::vector<CorpusOps> entries = {corpus_expr(), corpus_csv(), corpus_xml_lite(),
                                                 corpus_mini_c()};
  return entries;
}

}  // namespace gevo
