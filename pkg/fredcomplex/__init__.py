"""
Documentation of fredcomplex, desk-scale numerics for Fredholm complexes.

The computational options are as follows:
 - Finite complexes
  - cohomology (Laplacian kernels and rank-nullity)
  - Hodge parametrices
  - lifting of quasicomplexes
 - Morphisms
  - mapping cones
  - kernel and cokernel complexes
 - Toeplitz (projected) complexes
  - lift to ordinary complexes
  - parametrix extraction
 - Circle algebra
  - Calderon projector, Toeplitz compressions
  - Fredholm index versus winding number
 - Boundary symbols on the half-line
  - Cauchy-Riemann and Dolbeault families
  - complementation and index element
  - clutching winding of the kernel bundle
"""
