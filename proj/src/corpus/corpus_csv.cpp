#include <gevo_gen/csv.gen.hpp>

#include "corpus_entries.hpp"
#include "gevo/corpus_impl.hpp"

namespace gevo {

const CorpusOps& corpus_csv() {
  static const CorpusOps ops = make_corpus_ops<gevo_gen::csv::Types>("csv");
  return ops;
}

}  // namespace gevo
