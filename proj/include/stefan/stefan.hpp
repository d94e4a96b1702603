#pragma once

#include "stefan/bounds.hpp"
#include "stefan/error.hpp"
#include "stefan/field_reconstruction.hpp"
#include "stefan/grid.hpp"
#include "stefan/harness.hpp"
#include "stefan/heat_kernel.hpp"
#include "stefan/interface_solver.hpp"
#include "stefan/io.hpp"
#include "stefan/kinetics.hpp"
#include "stefan/params.hpp"
#include "stefan/quadrature.hpp"
#include "stefan/reference_pde.hpp"
#include "stefan/tangent.hpp"
