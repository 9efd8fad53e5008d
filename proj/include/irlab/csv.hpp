#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "irlab/subset.hpp"
#include "irlab/types.hpp"

namespace irlab::csv {

std::string format_number(double v);

void write_matrix(std::ostream& out, const ApMatrix& m);
void write_vector(std::ostream& out, const EffVector& v);
void write_series(std::ostream& out, const std::vector<subset::SeriesRow>& rows,
                  const subset::ParetoArchive* best, const subset::ParetoArchive* worst);

ApMatrix read_matrix(std::istream& in);

}  // namespace irlab::csv
