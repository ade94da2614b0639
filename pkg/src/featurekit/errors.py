"""Exception hierarchy shared by all featurekit modules."""


class FeatureKitError(Exception):
    """Base class for all featurekit errors."""


# -- collection construction / enrichment --------------------------------

class DuplicateId(FeatureKitError):
    def __init__(self, feature_id):
        self.feature_id = feature_id
        super().__init__(f"duplicate feature id {feature_id}")


class UnknownId(FeatureKitError):
    def __init__(self, feature_id):
        self.feature_id = feature_id
        super().__init__(f"no feature with id {feature_id}")


class MixedCrs(FeatureKitError):
    pass


class CrsMismatch(FeatureKitError):
    pass


class EmptyCollection(FeatureKitError):
    pass


class CollectionMismatch(FeatureKitError):
    pass


# -- parsing --------------------------------------------------------------

class MalformedJson(FeatureKitError):
    def __init__(self, message, position=None):
        self.position = position
        super().__init__(message if position is None
                         else f"{message} (at offset {position})")


class MissingElementsArray(FeatureKitError):
    pass


class UnsupportedGeometry(FeatureKitError):
    def __init__(self, kind):
        self.kind = kind
        super().__init__(f"unsupported geometry kind: {kind}")


class MissingColumn(FeatureKitError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing column: {name!r}")


class EmptyInput(FeatureKitError):
    pass


class UnsupportedCompression(FeatureKitError):
    def __init__(self, code):
        self.code = code
        super().__init__(f"unsupported TIFF compression code {code}")


class UnsupportedSampleFormat(FeatureKitError):
    pass


class MissingGeoTags(FeatureKitError):
    pass


# -- geometry reconstruction ----------------------------------------------

class UnclosableRing(FeatureKitError):
    pass


class AmbiguousChain(FeatureKitError):
    pass


# -- projection ------------------------------------------------------------

class LatitudeOutOfRange(FeatureKitError):
    def __init__(self, lat):
        self.lat = lat
        super().__init__(f"latitude {lat} outside +/-89.5 degree guard")


class NonConvergence(FeatureKitError):
    pass


# -- spatial queries --------------------------------------------------------

class MissingRadius(FeatureKitError):
    pass


class InvalidRange(FeatureKitError):
    pass


class EmptyRaster(FeatureKitError):
    pass


# -- compute -----------------------------------------------------------------

class ExpressionSyntaxError(FeatureKitError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class ExpressionTypeError(FeatureKitError):
    pass


class UnknownFunction(FeatureKitError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown function: {name}")


class TypeMismatch(FeatureKitError):
    def __init__(self, feature_id, variable):
        self.feature_id = feature_id
        self.variable = variable
        super().__init__(
            f"feature {feature_id}: variable {variable!r} has unusable type")


class MissingHeight(FeatureKitError):
    pass


class EmptySunList(FeatureKitError):
    pass


# -- mesh ----------------------------------------------------------------------

class TriangulationStall(FeatureKitError):
    pass


class NonPositiveHeight(FeatureKitError):
    pass


class DegenerateLine(FeatureKitError):
    pass


class StyleMismatch(FeatureKitError):
    def __init__(self, kind):
        self.kind = kind
        super().__init__(f"style does not apply to geometry kind {kind}")
