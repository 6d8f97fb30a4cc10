#include <gevo_gen/expr.gen.hpp>

#include "corpus_entries.hpp"
#include "gevo/corpus_impl.hpp"

namespace gevo {

const CorpusOps& corpus_expr() {
  static const CorpusOps ops = make_corpus_ops<gevo_gen::expr::Types>("expr");
  return ops;
}

}  // namespace gevo
