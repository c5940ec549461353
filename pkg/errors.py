'''
Exception hierarchy shared by every module. Each error carries the exit code
the command line surface reports and a dotted type for JSON error documents.
'''


class KhError(Exception):
    code = 1
    description = "Computation failed."
    type = "error.unknown"
    def __init__(self, *args, type=None):
        super().__init__(*args)
        if type is not None:
            self.type = type

    def __str__(self):
        if self.args:
            return f"{self.description} {self.args[0]}"
        return self.description


#==================================================================#
#  Input errors (exit code 1)
#==================================================================#
class UsageError(KhError):
    description = "Invalid command line usage."
    type = "usage.invalid"

class MalformedPd(KhError):
    description = "Malformed PD code."
    type = "diagram.malformed_pd"

class NonMatchingEdges(KhError):
    description = "Every edge id must appear exactly twice."
    type = "diagram.non_matching_edges"

class NonPlanar(KhError):
    description = "PD code does not describe a planar diagram."
    type = "diagram.non_planar"

class OrientationConflict(KhError):
    description = "No consistent orientation of the edges exists."
    type = "diagram.orientation_conflict"

class NoSuchFace(KhError):
    description = "Unknown face identifier."
    type = "diagram.no_such_face"

class NoSuchEdge(KhError):
    description = "Unknown edge identifier."
    type = "diagram.no_such_edge"

class DimensionMismatch(KhError):
    description = "Vertex length does not match the crossing count."
    type = "diagram.dimension_mismatch"

class NotAnEdge(KhError):
    description = "Vertices are not joined by an edge of the cube."
    type = "diagram.not_an_edge"

class NotAdjacent(KhError):
    description = "Basepoints are not on opposite sides of the crossing."
    type = "pointed.not_adjacent"

class DifferentComponents(KhError):
    description = "Basepoints lie on different link components."
    type = "pointed.different_components"

class SameComponentRequired(KhError):
    description = "Basepoints must lie on the same link component."
    type = "pointed.same_component_required"

class DegenerateResolution(KhError):
    description = "Some circle of the resolution carries no basepoint."
    type = "unlink.degenerate_resolution"

class DegenerateVertex(KhError):
    description = "Some resolution of the cube is degenerate."
    type = "cube.degenerate_vertex"


#==================================================================#
#  Verification failures (exit code 2)
#==================================================================#
class VerificationFailure(KhError):
    code = 2
    description = "A checked identity does not hold."
    type = "verify.failed"

class NotAComplex(VerificationFailure):
    description = "Composite of differentials is not zero."
    type = "verify.not_a_complex"

class OrderingMismatch(VerificationFailure):
    description = "Induced edge map disagrees with the module formula."
    type = "verify.ordering_mismatch"

class NonUniqueSolution(VerificationFailure):
    description = "Edge map constraint system has more than one solution."
    type = "verify.non_unique_solution"

class NoSolution(VerificationFailure):
    description = "Edge map constraint system is inconsistent."
    type = "verify.no_solution"

class MismatchAt(VerificationFailure):
    description = "First pages differ along a cube edge."
    type = "verify.e1_mismatch"

class TablesDiffer(VerificationFailure):
    description = "Pointed homology tables of the two diagrams differ."
    type = "verify.tables_differ"
