#include <gevo_gen/xml_lite.gen.hpp>

#include "corpus_entries.hpp"
#include "gevo/corpus_impl.hpp"

namespace gevo {

const CorpusOps& corpus_xml_lite() {
  static const CorpusOps ops = make_corpus_ops<gevo_gen::xml_lite::Types>("xml_lite");
  return ops;
}

}  // namespace gevo
