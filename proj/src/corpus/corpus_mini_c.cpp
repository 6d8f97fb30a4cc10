#include <gevo_gen/mini_c.gen.hpp>

#include "corpus_entries.hpp"
#include "gevo/corpus_impl.hpp"

namespace gevo {

const CorpusOps& corpus_mini_c() {
  static const CorpusOps ops = make_corpus_ops<gevo_gen::mini_c::Types>("mini_c");
  return ops;
}

}  // namespace gevo
