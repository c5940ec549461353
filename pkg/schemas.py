'''
marshmallow schemas for every JSON document the command line prints or reads.
'''
import json
from fractions import Fraction
from typing import Dict, List, Optional

from marshmallow import EXCLUDE, Schema, fields, validate
from marshmallow.exceptions import ValidationError

from errors import UsageError
from utils import fmt_grade

SCHEMA_VERSION = 1


class KhSchema(Schema):
    pass


class GradeField(fields.Field):
    '''Half-integral gradings travel as strings ("-3/2") so that JSON stays exact.'''

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        return fmt_grade(value)

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return Fraction(value)
        except (TypeError, ValueError):
            raise ValidationError(f"not a grading: {value!r}")


#==================================================================#
#  Errors
#==================================================================#
class BasicErrorSchema(KhSchema):
    msg: str = fields.String(required=True)
    type: str = fields.String(required=True)

class ErrorSchema(KhSchema):
    detail: BasicErrorSchema = fields.Nested(BasicErrorSchema, required=True)


#==================================================================#
#  Diagrams
#==================================================================#
class DiagramFileSchema(KhSchema):
    class Meta:
        unknown = EXCLUDE

    name: Optional[str] = fields.String(metadata={"description": "Name of the bundled diagram."})
    description: str = fields.String(load_default="")
    pd: str = fields.String(required=True, metadata={"description": "PD code, e.g. \"X(1,2,2,1)\"; empty for crossingless unlinks."})
    free_loops: int = fields.Integer(load_default=0, validate=validate.Range(min=0))
    basepoints: str = fields.String(load_default="", metadata={"description": "Comma separated edge ids, optionally edge:slot."})

class DiagramListSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    diagrams: List[DiagramFileSchema] = fields.List(fields.Nested(DiagramFileSchema), required=True)

class CrossingSchema(KhSchema):
    index: int = fields.Integer(required=True)
    edges: List[int] = fields.List(fields.Integer(), required=True, validate=validate.Length(equal=4))
    sign: int = fields.Integer(required=True, validate=validate.OneOf([-1, 1]))

class EdgeSchema(KhSchema):
    label: int = fields.Integer(required=True)
    tail: Optional[List[int]] = fields.List(fields.Integer(), allow_none=True)
    head: Optional[List[int]] = fields.List(fields.Integer(), allow_none=True)
    free: bool = fields.Boolean(required=True)
    parity: int = fields.Integer(required=True, validate=validate.OneOf([0, 1]))

class FaceSchema(KhSchema):
    index: int = fields.Integer(required=True)
    edges: List[int] = fields.List(fields.Integer(), required=True)
    color: str = fields.String(required=True, validate=validate.OneOf(["black", "white"]))

class CircleSchema(KhSchema):
    index: int = fields.Integer(required=True)
    edges: List[int] = fields.List(fields.Integer(), required=True)
    points: List[int] = fields.List(fields.Integer(), required=True)

class ResolutionSchema(KhSchema):
    vertex: str = fields.String(required=True)
    circles: List[CircleSchema] = fields.List(fields.Nested(CircleSchema), required=True)

class DiagramSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    pd: str = fields.String(required=True)
    crossings: List[CrossingSchema] = fields.List(fields.Nested(CrossingSchema), required=True)
    edges: List[EdgeSchema] = fields.List(fields.Nested(EdgeSchema), required=True)
    faces: List[FaceSchema] = fields.List(fields.Nested(FaceSchema), required=True)
    outer_face: int = fields.Integer(required=True)
    coloring: Dict[str, str] = fields.Dict(keys=fields.String(), values=fields.String(validate=validate.OneOf(["black", "white"])), required=True)
    components: List[List[int]] = fields.List(fields.List(fields.Integer()), required=True)
    writhe: int = fields.Integer(required=True)
    linking_matrix: List[List[int]] = fields.List(fields.List(fields.Integer()), required=True)
    basepoints: List[str] = fields.List(fields.String(), required=True)
    basepoint_parities: List[int] = fields.List(fields.Integer(validate=validate.OneOf([0, 1])), required=True)
    resolutions: List[ResolutionSchema] = fields.List(fields.Nested(ResolutionSchema), required=True)


#==================================================================#
#  Homology tables
#==================================================================#
class RankEntrySchema(KhSchema):
    h: int = fields.Integer(required=True)
    q: int = fields.Integer(required=True)
    rank: int = fields.Integer(required=True, validate=validate.Range(min=0))
    torsion: List[int] = fields.List(fields.Integer(), load_default=list)

class DeltaEntrySchema(KhSchema):
    delta = GradeField(required=True)
    rank: int = fields.Integer(required=True, validate=validate.Range(min=0))

class HomologyReportSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    command: str = fields.String(required=True)
    ring: str = fields.String(required=True)
    pd: str = fields.String(required=True)
    basepoints: List[str] = fields.List(fields.String(), required=True)
    entries: List[RankEntrySchema] = fields.List(fields.Nested(RankEntrySchema), required=True)
    delta: List[DeltaEntrySchema] = fields.List(fields.Nested(DeltaEntrySchema), required=True)
    total_rank: int = fields.Integer(required=True)
    width: int = fields.Integer(required=True)

class ComplexDumpSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    generators: List[str] = fields.List(fields.String(), required=True)
    gradings: List[List[int]] = fields.List(fields.List(fields.Integer()), required=True)
    differential: List[List[int]] = fields.List(fields.List(fields.Integer(), validate=validate.Length(equal=3)), required=True,
                                                metadata={"description": "[row, col, value] triples."})


#==================================================================#
#  Spectral sequences
#==================================================================#
class PageEntrySchema(KhSchema):
    level: int = fields.Integer(required=True)
    h: int = fields.Integer(required=True)
    q: int = fields.Integer(required=True)
    rank: int = fields.Integer(required=True)

class PageSchema(KhSchema):
    page: int = fields.Integer(required=True)
    total: int = fields.Integer(required=True)
    entries: List[PageEntrySchema] = fields.List(fields.Nested(PageEntrySchema), required=True)

class SignLedgerEntrySchema(KhSchema):
    source: str = fields.String(required=True)
    target: str = fields.String(required=True)
    sign: int = fields.Integer(required=True, validate=validate.OneOf([-1, 1]))

class PageReportSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    ring: str = fields.String(required=True)
    pd: str = fields.String(required=True)
    basepoints: List[str] = fields.List(fields.String(), required=True)
    pages: List[PageSchema] = fields.List(fields.Nested(PageSchema), required=True)
    converged_at: int = fields.Integer(required=True)
    homology_rank: int = fields.Integer(required=True)
    d1_signs: List[SignLedgerEntrySchema] = fields.List(fields.Nested(SignLedgerEntrySchema), load_default=list)


#==================================================================#
#  Floer cube
#==================================================================#
class LevelDeltaEntrySchema(KhSchema):
    level: int = fields.Integer(required=True)
    delta = GradeField(required=True)
    rank: int = fields.Integer(required=True)

class GEntrySchema(KhSchema):
    level: int = fields.Integer(required=True)
    delta = GradeField(required=True)
    g = GradeField(required=True)
    rank: int = fields.Integer(required=True)

class GeneratorSchema(KhSchema):
    vertex: str = fields.String(required=True)
    lam: int = fields.Integer(required=True, data_key="lambda")
    gamma: int = fields.Integer(required=True)
    maslov = GradeField(required=True)
    alexander: int = fields.Integer(required=True)
    delta = GradeField(required=True)
    g = GradeField(required=True)

class EdgeMapSchema(KhSchema):
    source: str = fields.String(required=True)
    target: str = fields.String(required=True)
    kind: str = fields.String(required=True, validate=validate.OneOf(["merge", "split"]))
    distinguished: List[int] = fields.List(fields.Integer(), required=True)
    f0: List[List[int]] = fields.List(fields.List(fields.Integer()), required=True)
    f1: Optional[List[List[int]]] = fields.List(fields.List(fields.Integer()), allow_none=True)

class E2VariantSchema(KhSchema):
    variant: str = fields.String(required=True, validate=validate.OneOf(["full", "f0"]))
    total_rank: int = fields.Integer(required=True)
    width: int = fields.Integer(required=True)
    entries: List[LevelDeltaEntrySchema] = fields.List(fields.Nested(LevelDeltaEntrySchema), required=True)
    g_entries: Optional[List[GEntrySchema]] = fields.List(fields.Nested(GEntrySchema), allow_none=True)

class HfkReportSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    pd: str = fields.String(required=True)
    basepoints: List[str] = fields.List(fields.String(), required=True)
    generators: List[GeneratorSchema] = fields.List(fields.Nested(GeneratorSchema), required=True)
    edges: List[EdgeMapSchema] = fields.List(fields.Nested(EdgeMapSchema), required=True)
    variants: List[E2VariantSchema] = fields.List(fields.Nested(E2VariantSchema), required=True)
    filtration_inequality: bool = fields.Boolean(required=True)

class WitnessSchema(KhSchema):
    vertex: str = fields.String(required=True)
    khovanov: int = fields.Integer(required=True)
    floer: int = fields.Integer(required=True)

class ComparisonSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    pd: str = fields.String(required=True)
    basepoints: List[str] = fields.List(fields.String(), required=True)
    isomorphic: bool = fields.Boolean(required=True)
    e2_agrees: bool = fields.Boolean(required=True)
    witness: List[WitnessSchema] = fields.List(fields.Nested(WitnessSchema), required=True)
    khovanov_e2: List[LevelDeltaEntrySchema] = fields.List(fields.Nested(LevelDeltaEntrySchema), required=True)
    hfk_e2: List[LevelDeltaEntrySchema] = fields.List(fields.Nested(LevelDeltaEntrySchema), required=True)


#==================================================================#
#  Oracles and invariance
#==================================================================#
class JonesSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    pd: str = fields.String(required=True)
    from_homology: str = fields.String(required=True)
    from_bracket: str = fields.String(required=True)
    agree: bool = fields.Boolean(required=True)

class DeterminantSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    pd: str = fields.String(required=True)
    determinant: int = fields.Integer(required=True, validate=validate.Range(min=0))

class DifferenceSchema(KhSchema):
    h: int = fields.Integer(required=True)
    q: int = fields.Integer(required=True)
    left: int = fields.Integer(required=True)
    right: int = fields.Integer(required=True)

class InvarianceSchema(KhSchema):
    schema_version: int = fields.Integer(required=True)
    ring: str = fields.String(required=True)
    left: HomologyReportSchema = fields.Nested(HomologyReportSchema, required=True)
    right: HomologyReportSchema = fields.Nested(HomologyReportSchema, required=True)
    identical: bool = fields.Boolean(required=True)
    differences: List[DifferenceSchema] = fields.List(fields.Nested(DifferenceSchema), required=True)


#==================================================================#
#  Helpers
#==================================================================#
def dumps(schema: Schema, document: Dict) -> str:
    '''Validates a document against its schema and renders it byte-stably.'''
    errors = schema.validate(schema.dump(document))
    if errors:
        raise UsageError(f"{type(schema).__name__} rejected the report: {errors}")
    return json.dumps(schema.dump(document), indent=3, sort_keys=True)


def load_diagram_file(js: Dict) -> Dict:
    try:
        return DiagramFileSchema().load(js)
    except ValidationError as e:
        raise UsageError(f"invalid diagram file: {e.messages}")
