#pragma once

#include "gevo/corpus.hpp"

namespace gevo {

const CorpusOps& corpus_expr();
const CorpusOps& corpus_csv();
const CorpusOps& corpus_xml_lite();
const CorpusOps& corpus_mini_c();

}  // namespace gevo
