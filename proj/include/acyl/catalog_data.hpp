#pragma once

// Generated from data/fano_catalog.csv; the test suite checks the two agree.

namespace acyl::catalog::detail {

inline constexpr const char* kEmbeddedCatalog = R"CSV(
# Fano threefolds by Mori-Mukai position (Picard rank, number in rank).
# Format: rank,number,index,very_ample,line_candidate
# Index and numbering follow the standard Mori-Mukai tables; very_ample is false
# for the eight families whose anticanonical bundle is not very ample; line_candidate
# marks the very ample index-1 rank-1 families, which carry unobstructed lines.
1,1,1,false,false  # Mori-Mukai 1-1, sextic double solid V2
1,2,1,false,false  # Mori-Mukai 1-2, quartic or double quadric V4
1,3,1,true,true  # Mori-Mukai 1-3, V6
1,4,1,true,true  # Mori-Mukai 1-4, V8
1,5,1,true,true  # Mori-Mukai 1-5, V10
1,6,1,true,true  # Mori-Mukai 1-6, V12
1,7,1,true,true  # Mori-Mukai 1-7, V14
1,8,1,true,true  # Mori-Mukai 1-8, V16
1,9,1,true,true  # Mori-Mukai 1-9, V18
1,10,1,true,true  # Mori-Mukai 1-10, V22
1,11,2,true,false  # Mori-Mukai 1-11, del Pezzo V1
1,12,2,false,false  # Mori-Mukai 1-12, del Pezzo V2, quartic double solid
1,13,2,true,false  # Mori-Mukai 1-13, cubic threefold
1,14,2,true,false  # Mori-Mukai 1-14, intersection of two quadrics
1,15,2,true,false  # Mori-Mukai 1-15, del Pezzo V5
1,16,3,true,false  # Mori-Mukai 1-16, quadric Q
1,17,4,true,false  # Mori-Mukai 1-17, P3
2,1,1,false,false  # Mori-Mukai 2-1
2,2,1,false,false  # Mori-Mukai 2-2
2,3,1,false,false  # Mori-Mukai 2-3
2,4,1,true,false  # Mori-Mukai 2-4
2,5,1,true,false  # Mori-Mukai 2-5
2,6,1,true,false  # Mori-Mukai 2-6
2,7,1,true,false  # Mori-Mukai 2-7
2,8,1,true,false  # Mori-Mukai 2-8
2,9,1,true,false  # Mori-Mukai 2-9
2,10,1,true,false  # Mori-Mukai 2-10
2,11,1,true,false  # Mori-Mukai 2-11
2,12,1,true,false  # Mori-Mukai 2-12
2,13,1,true,false  # Mori-Mukai 2-13
2,14,1,true,false  # Mori-Mukai 2-14
2,15,1,true,false  # Mori-Mukai 2-15
2,16,1,true,false  # Mori-Mukai 2-16
2,17,1,true,false  # Mori-Mukai 2-17
2,18,1,true,false  # Mori-Mukai 2-18
2,19,1,true,false  # Mori-Mukai 2-19
2,20,1,true,false  # Mori-Mukai 2-20
2,21,1,true,false  # Mori-Mukai 2-21
2,22,1,true,false  # Mori-Mukai 2-22
2,23,1,true,false  # Mori-Mukai 2-23
2,24,1,true,false  # Mori-Mukai 2-24
2,25,1,true,false  # Mori-Mukai 2-25
2,26,1,true,false  # Mori-Mukai 2-26
2,27,1,true,false  # Mori-Mukai 2-27
2,28,1,true,false  # Mori-Mukai 2-28
2,29,1,true,false  # Mori-Mukai 2-29
2,30,1,true,false  # Mori-Mukai 2-30
2,31,1,true,false  # Mori-Mukai 2-31
2,32,2,true,false  # Mori-Mukai 2-32, divisor of bidegree (1,1) in P2xP2
2,33,1,true,false  # Mori-Mukai 2-33
2,34,1,true,false  # Mori-Mukai 2-34, P1xP2
2,35,2,true,false  # Mori-Mukai 2-35, V7, blow-up of P3 at a point
2,36,1,true,false  # Mori-Mukai 2-36
3,1,1,true,false  # Mori-Mukai 3-1
3,2,1,true,false  # Mori-Mukai 3-2
3,3,1,true,false  # Mori-Mukai 3-3
3,4,1,true,false  # Mori-Mukai 3-4
3,5,1,true,false  # Mori-Mukai 3-5
3,6,1,true,false  # Mori-Mukai 3-6
3,7,1,true,false  # Mori-Mukai 3-7
3,8,1,true,false  # Mori-Mukai 3-8
3,9,1,true,false  # Mori-Mukai 3-9
3,10,1,true,false  # Mori-Mukai 3-10
3,11,1,true,false  # Mori-Mukai 3-11
3,12,1,true,false  # Mori-Mukai 3-12
3,13,1,true,false  # Mori-Mukai 3-13
3,14,1,true,false  # Mori-Mukai 3-14
3,15,1,true,false  # Mori-Mukai 3-15
3,16,1,true,false  # Mori-Mukai 3-16
3,17,1,true,false  # Mori-Mukai 3-17
3,18,1,true,false  # Mori-Mukai 3-18
3,19,1,true,false  # Mori-Mukai 3-19
3,20,1,true,false  # Mori-Mukai 3-20
3,21,1,true,false  # Mori-Mukai 3-21
3,22,1,true,false  # Mori-Mukai 3-22
3,23,1,true,false  # Mori-Mukai 3-23
3,24,1,true,false  # Mori-Mukai 3-24
3,25,1,true,false  # Mori-Mukai 3-25
3,26,1,true,false  # Mori-Mukai 3-26
3,27,2,true,false  # Mori-Mukai 3-27, P1xP1xP1
3,28,1,true,false  # Mori-Mukai 3-28
3,29,1,true,false  # Mori-Mukai 3-29
3,30,1,true,false  # Mori-Mukai 3-30
3,31,1,true,false  # Mori-Mukai 3-31
4,1,1,true,false  # Mori-Mukai 4-1
4,2,1,true,false  # Mori-Mukai 4-2
4,3,1,true,false  # Mori-Mukai 4-3
4,4,1,true,false  # Mori-Mukai 4-4
4,5,1,true,false  # Mori-Mukai 4-5
4,6,1,true,false  # Mori-Mukai 4-6
4,7,1,true,false  # Mori-Mukai 4-7
4,8,1,true,false  # Mori-Mukai 4-8
4,9,1,true,false  # Mori-Mukai 4-9
4,10,1,true,false  # Mori-Mukai 4-10
4,11,1,true,false  # Mori-Mukai 4-11
4,12,1,true,false  # Mori-Mukai 4-12
4,13,1,true,false  # Mori-Mukai 4-13
5,1,1,true,false  # Mori-Mukai 5-1
5,2,1,true,false  # Mori-Mukai 5-2
5,3,1,true,false  # Mori-Mukai 5-3
6,1,1,true,false  # Mori-Mukai 6-1, P1xS7
7,1,1,false,false  # Mori-Mukai 7-1, P1xS6
8,1,1,false,false  # Mori-Mukai 8-1, P1xS5
9,1,1,true,false  # Mori-Mukai 9-1, P1xS4
10,1,1,true,false  # Mori-Mukai 10-1, P1xS3
)CSV";

}  // namespace acyl::catalog::detail
