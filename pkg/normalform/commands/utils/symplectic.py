"""
Symplectic linear algebra on quadratic forms.

Quadratic symbols q(z) = 1/2 z^T H z are handled through their Hessians H
and Hamiltonian matrices J H, with J = [[0, I], [-I, 0]]. A frame S is
symplectic when S^T J S = J; substituting z = S w then preserves Poisson
brackets.
"""
import logging
from collections import namedtuple

import numpy
import sympy
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from normalform.commands.utils.brackets import poisson
from normalform.commands.utils.errors import DimensionMismatch
from normalform.commands.utils.errors import ExactFrameError
from normalform.commands.utils.errors import NotCartan
from normalform.commands.utils.errors import ResonantGenericityFailure
from normalform.commands.utils.linalg import exact_rank
from normalform.commands.utils.linalg import matmul
from normalform.commands.utils.polynomial import CoefficientKind
from normalform.commands.utils.polynomial import Monomial
from normalform.commands.utils.polynomial import PolySymbol
from normalform.commands.utils.polynomial import matrix_rows
from normalform.commands.utils.polynomial import substitute_linear

logger = logging.getLogger(__name__)

TOL_SYMPLECTIC = 1e-9
TOL_EIGEN = 1e-8
CLUSTER_TOL = 1e-6
MAX_RETRIES = 20

HYPERBOLIC = 'hyperbolic'
ELLIPTIC = 'elliptic'
FOCUS_FOCUS = 'focus-focus'

# A^3 = kappa A and rank of the Hamiltonian matrix of each model form
_MODEL_POWERS = {
    HYPERBOLIC: [(1, 2)],
    ELLIPTIC: [(-4, 2)],
    FOCUS_FOCUS: [(-1, 4), (1, 4)],
}


def standard_j(n, kind=None):
    """J = [[0, I], [-I, 0]] as numpy, or nested lists of kind elements."""
    if kind is None or not kind.is_exact:
        eye = numpy.eye(n)
        zero = numpy.zeros((n, n))
        return numpy.block([[zero, eye], [-eye, zero]])
    rows = [[kind.zero] * (2 * n) for _ in range(2 * n)]
    for j in range(n):
        rows[j][n + j] = kind.one
        rows[n + j][j] = -kind.one
    return rows


class QuadraticForm(namedtuple('QuadraticForm', ['hessian', 'kind'])):
    """q(z) = 1/2 z^T H z, H stored as nested lists of kind elements."""
    __slots__ = ()

    @property
    def n(self):
        return len(self.hessian) // 2

    def as_float(self):
        target = self.kind.floated()
        return numpy.array(
            [[target.convert(v) for v in row] for row in self.hessian],
            dtype=complex if target.is_complex else float,
        )

    def hamiltonian(self):
        if self.kind.is_exact:
            return matmul(standard_j(self.n, self.kind), self.hessian, self.kind)
        return standard_j(self.n).dot(self.as_float())

    def to_symbol(self, **cuts):
        return quadratic_symbol(self.hessian, self.kind, **cuts)

    def to_json(self):
        return [[self.kind.to_json(v) for v in row] for row in self.hessian]


def quadratic_symbol(hessian, kind=CoefficientKind.RATIONAL, **cuts):
    rows = matrix_rows(hessian)
    size = len(rows)
    n = size // 2
    half = kind.convert(QQ(1, 2) if kind.is_exact else 0.5)
    terms = {}
    for a in range(size):
        for b in range(a, size):
            value = kind.convert(rows[a][b])
            if not value:
                continue
            exps = [0] * size
            exps[a] += 1
            exps[b] += 1
            terms[Monomial(tuple(exps), 0)] = value * half if a == b else value
    return PolySymbol(n, terms, kind=kind, **cuts)


def hessian_at(f, point=None):
    """
    Matrix of second derivatives of f at a point

    Arguments:
    f <PolySymbol> -- Symbol, its hbar-free part is used
    point <list> -- 2n coordinates, the origin when omitted
    """
    size = 2 * f.n
    if point is not None and any(point):
        if len(point) != size:
            raise DimensionMismatch('Point must have %d coordinates' % size)
        f = f.principal().with_cuts().translate(point)
    part = f.homogeneous_part(2, 0)
    kind = f.kind
    rows = [[kind.zero] * size for _ in range(size)]
    for m, c in part.terms.items():
        indices = [i for i, e in enumerate(m.exps) for _ in range(e)]
        a, b = indices
        if a == b:
            rows[a][a] = c * kind.convert(2)
        else:
            rows[a][b] = c
            rows[b][a] = c
    return QuadraticForm(rows, kind)


def _forms(q_list):
    forms = []
    for q in q_list:
        forms.append(q if isinstance(q, QuadraticForm) else hessian_at(q))
    sizes = set(len(f.hessian) for f in forms)
    if len(sizes) != 1:
        raise DimensionMismatch('Quadratic forms of different sizes')
    return forms


def check_symplectic(S, tol=TOL_SYMPLECTIC):
    """True when S^T J S = J, exactly for exact entries."""
    rows = matrix_rows(S)
    size = len(rows)
    if size % 2 or any(len(row) != size for row in rows):
        raise DimensionMismatch('A symplectic matrix is square of even size')
    n = size // 2
    exact = all(not isinstance(v, (float, complex, numpy.floating)) for row in rows for v in row)
    if exact:
        kind = CoefficientKind.RATIONAL
        S = [[kind.convert(v) for v in row] for row in rows]
        J = standard_j(n, kind)
        St = [list(col) for col in zip(*S)]
        return matmul(matmul(St, J, kind), S, kind) == J
    S = numpy.array(rows, dtype=float)
    J = standard_j(n)
    return bool(numpy.abs(S.T.dot(J).dot(S) - J).max() <= tol)


class CartanType(namedtuple('CartanType', ['m_e', 'm_h', 'm_f', 'blocks'])):
    """
    Williamson type with the block layout

    blocks lists (kind, indices) in variable order: hyperbolic blocks first,
    then elliptic blocks, then focus-focus pairs.
    """
    __slots__ = ()

    @classmethod
    def from_counts(cls, m_e, m_h, m_f):
        blocks = []
        index = 0
        for _ in range(m_h):
            blocks.append((HYPERBOLIC, (index,)))
            index += 1
        for _ in range(m_e):
            blocks.append((ELLIPTIC, (index,)))
            index += 1
        for _ in range(m_f):
            blocks.append((FOCUS_FOCUS, (index, index + 1)))
            index += 2
        return cls(m_e, m_h, m_f, tuple(blocks))

    @property
    def n(self):
        return self.m_e + self.m_h + 2 * self.m_f

    @property
    def signature(self):
        return (self.m_e, self.m_h, self.m_f)

    def block_of(self, j):
        for block in self.blocks:
            if j in block[1]:
                return block
        raise IndexError(j)

    def to_json(self):
        return {
            'm_e': self.m_e,
            'm_h': self.m_h,
            'm_f': self.m_f,
            'blocks': [{'type': kind, 'indices': list(indices)} for kind, indices in self.blocks],
        }

    @classmethod
    def from_json(cls, data):
        return cls.from_counts(int(data['m_e']), int(data['m_h']), int(data['m_f']))


def model_forms(cartan, kind=CoefficientKind.RATIONAL, **cuts):
    """Model quadratics of the standard basis, one per variable index."""
    n = cartan.n
    forms = [None] * n
    x = [PolySymbol.x(n, j, kind=kind, **cuts) for j in range(n)]
    xi = [PolySymbol.xi(n, j, kind=kind, **cuts) for j in range(n)]
    for block, indices in cartan.blocks:
        if block == HYPERBOLIC:
            j, = indices
            forms[j] = x[j] * xi[j]
        elif block == ELLIPTIC:
            j, = indices
            forms[j] = x[j] * x[j] + xi[j] * xi[j]
        else:
            i, j = indices
            forms[i] = x[i] * xi[j] - x[j] * xi[i]
            forms[j] = x[i] * xi[i] + x[j] * xi[j]
    return forms


CartanReport = namedtuple('CartanReport', [
    'commuting', 'span_rank', 'semisimple', 'witness', 'eigenvalues',
])


def failed_check(report, n):
    if not report.commuting:
        return 'not commuting'
    if report.span_rank != n:
        return 'span dimension %d != %d' % (report.span_rank, n)
    if not report.semisimple:
        return 'not semisimple'
    return None


def _scale(hessians):
    return max([numpy.abs(h).max() for h in hessians] + [1.0])


def _is_semisimple(A, eigenvalues, scale):
    size = A.shape[0]
    remaining = list(eigenvalues)
    while remaining:
        value = remaining[0]
        cluster = [v for v in remaining if abs(v - value) <= CLUSTER_TOL * scale]
        remaining = [v for v in remaining if abs(v - value) > CLUSTER_TOL * scale]
        centre = numpy.mean(cluster)
        singular = numpy.linalg.svd(A - centre * numpy.eye(size), compute_uv=False)
        deficiency = int(numpy.sum(singular <= TOL_EIGEN * scale * size))
        if deficiency != len(cluster):
            return False
    return True


def verify_cartan(q_list, seed=0):
    """
    Check that n quadratic forms span a Cartan subalgebra

    The report records pairwise commutation, the span dimension and
    semisimplicity of one random integer combination (the witness).
    """
    forms = _forms(q_list)
    n = forms[0].n
    hessians = [f.as_float() for f in forms]
    scale = _scale(hessians)
    J = standard_j(n)
    commuting = True
    for i in range(len(hessians)):
        for j in range(i + 1, len(hessians)):
            bracket = hessians[i].dot(J).dot(hessians[j]) - hessians[j].dot(J).dot(hessians[i])
            if numpy.abs(bracket).max() > TOL_EIGEN * scale * scale:
                commuting = False
    stacked = numpy.array([h.ravel() for h in hessians])
    span_rank = int(numpy.linalg.matrix_rank(stacked, tol=TOL_EIGEN * scale))
    rng = numpy.random.default_rng(seed)
    witness = [int(c) for c in rng.integers(1, 1001, size=len(hessians))]
    A = J.dot(sum(c * h for c, h in zip(witness, hessians)))
    eigenvalues = numpy.linalg.eigvals(A)
    semisimple = _is_semisimple(A, eigenvalues, _scale([A]))
    return CartanReport(commuting, span_rank, semisimple, witness, eigenvalues)


CartanBasis = namedtuple('CartanBasis', ['cartan', 'S', 'C', 'models', 'witness'])


def _is_generic(eigenvalues, scale):
    tol = TOL_EIGEN * scale
    if numpy.abs(eigenvalues).min() <= tol:
        return False
    for i in range(len(eigenvalues)):
        for j in range(i + 1, len(eigenvalues)):
            if abs(eigenvalues[i] - eigenvalues[j]) <= CLUSTER_TOL * scale:
                return False
    return True


def _closest(eigenvalues, target):
    return int(numpy.argmin(numpy.abs(eigenvalues - target)))


def _leading(vector):
    """First entry of vector whose modulus is comparable to the largest one."""
    moduli = numpy.abs(vector)
    return vector[numpy.flatnonzero(moduli > 0.5 * moduli.max())[0]]


def _unit_phase(vector):
    """vector rotated so that its leading entry is real and positive."""
    value = _leading(vector)
    return vector * (numpy.conj(value) / abs(value))


def _symplectic_flip(size, n, block, indices, which):
    """Frame change that negates one model form of a block."""
    F = numpy.eye(size)
    if block == HYPERBOLIC or (block == FOCUS_FOCUS and which == 1):
        for j in indices:
            F[j, j] = 0.0
            F[n + j, n + j] = 0.0
            F[j, n + j] = 1.0
            F[n + j, j] = -1.0
    else:
        i, j = indices
        for a, b in [(i, j), (n + i, n + j)]:
            F[a, a] = 0.0
            F[b, b] = 0.0
            F[a, b] = 1.0
            F[b, a] = 1.0
    return F


def _recombination(hessians, model_hessians, S):
    basis = numpy.array([m.ravel() for m in model_hessians]).T
    C = []
    worst = 0.0
    for h in hessians:
        target = S.T.dot(h).dot(S).ravel()
        coeffs = numpy.linalg.lstsq(basis, target, rcond=None)[0]
        worst = max(worst, numpy.abs(basis.dot(coeffs) - target).max())
        C.append(coeffs)
    return numpy.array(C), worst


def williamson_classify(q_list, seed=0, max_retries=MAX_RETRIES):
    """
    Williamson type, standardizing frame S and recombination C

    q_i o S = sum_j C_ij m_j with m_j the model forms. Column signs of C
    are normalized: the first nonzero entry of every hyperbolic or
    focus-focus column is positive.
    """
    forms = _forms(q_list)
    n = forms[0].n
    if len(forms) != n:
        raise NotCartan('count', '%d forms in %d degrees of freedom' % (len(forms), n))
    report = verify_cartan(forms, seed=seed)
    problem = failed_check(report, n)
    if problem:
        raise NotCartan(problem)
    hessians = [f.as_float() for f in forms]
    J = standard_j(n)
    rng = numpy.random.default_rng(seed)
    for attempt in range(max_retries):
        witness = [int(c) for c in rng.integers(1, 1001, size=n)]
        A = J.dot(sum(c * h for c, h in zip(witness, hessians)))
        scale = _scale([A])
        eigenvalues, vectors = numpy.linalg.eig(A)
        if _is_generic(eigenvalues, scale):
            break
        logger.debug('Combination %s is not generic, retrying', witness)
    else:
        raise ResonantGenericityFailure(
            'No generic combination found in %d attempts' % max_retries
        )
    tol = TOL_EIGEN * scale
    real, imaginary, complex_ = [], [], []
    for value in eigenvalues:
        if abs(value.imag) <= tol and value.real > 0:
            real.append(value.real)
        elif abs(value.real) <= tol and value.imag > 0:
            imaginary.append(value.imag)
        elif value.real > tol and value.imag > tol:
            complex_.append(value)
    m_h, m_e, m_f = len(real), len(imaginary), len(complex_)
    if m_h + m_e + 2 * m_f != n:
        raise NotCartan('eigenvalue pairing')
    cartan = CartanType.from_counts(m_e, m_h, m_f)
    size = 2 * n
    S = numpy.zeros((size, size))
    index = 0
    for lam in sorted(real):
        u = vectors[:, _closest(eigenvalues, lam)].real
        v = vectors[:, _closest(eigenvalues, -lam)].real
        v = v / u.dot(J).dot(v)
        sign = 1.0 if _leading(u) > 0 else -1.0
        t = numpy.sqrt(numpy.linalg.norm(v) / numpy.linalg.norm(u))
        u, v = sign * t * u, sign * v / t
        S[:, index], S[:, n + index] = u, v
        index += 1
    for beta in sorted(imaginary):
        e = _unit_phase(vectors[:, _closest(eigenvalues, 1j * beta)])
        a, b = e.real, e.imag
        sigma = a.dot(J).dot(b)
        root = numpy.sqrt(abs(sigma))
        S[:, index] = a / root
        S[:, n + index] = (b if sigma > 0 else -b) / root
        index += 1
    for lam in sorted(complex_, key=abs):
        e = _unit_phase(vectors[:, _closest(eigenvalues, lam)])
        f = vectors[:, _closest(eigenvalues, -lam.conjugate())]
        t = numpy.conj(2.0 / e.dot(J).dot(numpy.conj(f)))
        tf = t * f
        r = numpy.sqrt(numpy.linalg.norm(tf) / numpy.linalg.norm(e))
        e, tf = r * e, tf / r
        S[:, index], S[:, index + 1] = e.real, -e.imag
        S[:, n + index], S[:, n + index + 1] = tf.real, -tf.imag
        index += 2
    models = model_forms(cartan, kind=CoefficientKind.FLOAT)
    model_hessians = [hessian_at(m).as_float() for m in models]
    C, _ = _recombination(hessians, model_hessians, S)
    for block, indices in cartan.blocks:
        if block == ELLIPTIC:
            continue
        for which, j in enumerate(indices):
            column = C[:, j]
            nonzero = [v for v in column if abs(v) > tol]
            if nonzero and nonzero[0] < 0:
                S = S.dot(_symplectic_flip(size, n, block, indices, which))
                C[:, j] = -C[:, j]
    C, residual = _recombination(hessians, model_hessians, S)
    if residual > TOL_EIGEN * _scale(hessians) * max(1.0, numpy.abs(S).max()) ** 2:
        raise NotCartan('frame', 'Standardizing frame leaves residual %.3g' % residual)
    if not check_symplectic(S, tol=TOL_SYMPLECTIC * max(1.0, numpy.abs(S).max() ** 2)):
        raise NotCartan('frame', 'Standardizing frame is not symplectic')
    logger.info('Classified type (m_e, m_h, m_f) = %s', cartan.signature)
    return CartanBasis(cartan, S, C, models, witness)


def centralizer_basis(form):
    """
    Real basis of the Cartan subalgebra containing one regular form

    Each eigenvalue group of the Hamiltonian matrix contributes one
    generator, two for a focus-focus quadruple.
    """
    form = form if isinstance(form, QuadraticForm) else hessian_at(form)
    n = form.n
    J = standard_j(n)
    A = J.dot(form.as_float())
    scale = _scale([A])
    eigenvalues, vectors = numpy.linalg.eig(A)
    if not _is_generic(eigenvalues, scale):
        raise NotCartan('regular', 'Quadratic form is not regular')
    inverse = numpy.linalg.inv(vectors)
    tol = TOL_EIGEN * scale

    def projector(i):
        return numpy.outer(vectors[:, i], inverse[i, :])

    generators = []
    seen = set()
    for i, value in enumerate(eigenvalues):
        if i in seen:
            continue
        if abs(value.imag) <= tol:
            partner = _closest(eigenvalues, -value)
            seen.update([i, partner])
            sign = 1.0 if value.real > 0 else -1.0
            generators.append(sign * (projector(i) - projector(partner)))
        elif abs(value.real) <= tol:
            partner = _closest(eigenvalues, -value)
            seen.update([i, partner])
            sign = 1.0 if value.imag > 0 else -1.0
            generators.append(sign * 1j * (projector(i) - projector(partner)))
        else:
            group = [i, _closest(eigenvalues, -value), _closest(eigenvalues, value.conjugate()),
                     _closest(eigenvalues, -value.conjugate())]
            seen.update(group)
            real_part = sum(numpy.sign(eigenvalues[k].real) * projector(k) for k in group)
            imag_part = sum(1j * numpy.sign(eigenvalues[k].imag) * projector(k) for k in group)
            generators.extend([imag_part, real_part])
    forms = []
    for B in generators:
        H = -J.dot(B.real)
        H = (H + H.T) / 2.0
        forms.append(quadratic_symbol(H, CoefficientKind.FLOAT))
    return forms


# exact frames

def _exact_hamiltonian(q):
    form = hessian_at(q)
    if form.kind is not CoefficientKind.RATIONAL:
        raise ExactFrameError('Exact frames need rational quadratic forms')
    return form, form.hamiltonian()


def _matrix_equal(a, b):
    return all(x == y for row_a, row_b in zip(a, b) for x, y in zip(row_a, row_b))


def _scaled(rows, factor):
    return [[v * factor for v in row] for row in rows]


def certify_standard_basis(basis, cartan):
    """
    Exact certificate that rational forms form a standard basis of a type

    Raises ExactFrameError naming the first failed check.
    """
    n = cartan.n
    if len(basis) != n:
        raise ExactFrameError('Expected %d forms, got %d' % (n, len(basis)))
    for i in range(n):
        for j in range(i + 1, n):
            if poisson(basis[i], basis[j]):
                raise ExactFrameError('Forms %d and %d do not commute' % (i, j))
    kind = CoefficientKind.RATIONAL
    for block, indices in cartan.blocks:
        for (kappa, rank), j in zip(_MODEL_POWERS[block], indices):
            form, A = _exact_hamiltonian(basis[j])
            cube = matmul(matmul(A, A, kind), A, kind)
            if not _matrix_equal(cube, _scaled(A, QQ(kappa))):
                raise ExactFrameError(
                    'Form %d does not satisfy A^3 = %d A of a %s block' % (j, kappa, block)
                )
            if exact_rank(A) != rank:
                raise ExactFrameError('Form %d has the wrong rank for a %s block' % (j, block))
            if block == ELLIPTIC:
                H = sympy.Matrix([[QQ.to_sympy(v) for v in row] for row in form.hessian])
                if not H.is_positive_semidefinite:
                    raise ExactFrameError('Elliptic form %d is not positive' % j)
    return True


def _omega(u, v, n):
    total = QQ.zero
    for j in range(n):
        total += u[j] * v[n + j] - u[n + j] * v[j]
    return total


def _symplectic_gram_schmidt(vectors, n):
    pairs = []
    remaining = [list(v) for v in vectors if any(v)]
    while remaining:
        u = remaining.pop(0)
        partner = None
        for k, w in enumerate(remaining):
            if _omega(u, w, n):
                partner = k
                break
        if partner is None:
            raise ExactFrameError('Block subspace is not symplectic')
        v = remaining.pop(partner)
        scale = _omega(u, v, n)
        v = [c / scale for c in v]
        updated = []
        for w in remaining:
            wv = _omega(w, v, n)
            wu = _omega(w, u, n)
            w = [wc - wv * uc + wu * vc for wc, uc, vc in zip(w, u, v)]
            if any(w):
                updated.append(w)
        remaining = updated
        pairs.append((u, v))
    return pairs


def rational_block_frame(basis, cartan):
    """
    Exact symplectic T making every basis element block-local

    Column j and n + j of T span the symplectic plane of variable j. The
    image of each block's Hamiltonian matrix is split into canonical pairs
    by symplectic Gram-Schmidt over QQ.
    """
    n = cartan.n
    size = 2 * n
    columns = [None] * size
    for block, indices in cartan.blocks:
        j = indices[-1]
        _, A = _exact_hamiltonian(basis[j])
        space = DomainMatrix(A, (size, size), QQ).columnspace().to_list()
        vectors = [list(col) for col in zip(*space)] if space and space[0] else []
        pairs = _symplectic_gram_schmidt(vectors, n)
        if len(pairs) != len(indices):
            raise ExactFrameError('Block %s of variables %s has dimension %d'
                                  % (block, list(indices), 2 * len(pairs)))
        for index, (u, v) in zip(indices, pairs):
            columns[index] = u
            columns[n + index] = v
    T = [[columns[c][r] for c in range(size)] for r in range(size)]
    if not check_symplectic(T):
        raise ExactFrameError('Block frame is not symplectic')
    return T


def frame_inverse(T, kind=CoefficientKind.RATIONAL):
    """Inverse of a symplectic frame, -J T^T J."""
    rows = matrix_rows(T)
    n = len(rows) // 2
    if kind.is_exact:
        J = standard_j(n, kind)
        Tt = [[kind.convert(v) for v in col] for col in zip(*rows)]
        return _scaled(matmul(matmul(J, Tt, kind), J, kind), -kind.one)
    J = standard_j(n)
    return -J.dot(numpy.array(rows, dtype=float).T).dot(J)


def block_forms(basis, T):
    """The forms of basis expressed in the frame T."""
    return [substitute_linear(q, T) for q in basis]


def random_rational_symplectic(n, rng, spread=2):
    """
    Seeded exact symplectic matrix

    Product of an upper shear, a lower shear (symmetric integer blocks) and
    diag(A, A^-T) with A unit lower triangular.
    """
    kind = CoefficientKind.RATIONAL
    size = 2 * n

    def symmetric():
        B = rng.integers(-spread, spread + 1, size=(n, n))
        return (B + B.T) // 2

    upper = [[kind.convert(int(i == j)) for j in range(size)] for i in range(size)]
    lower = [[kind.convert(int(i == j)) for j in range(size)] for i in range(size)]
    B, D = symmetric(), symmetric()
    for i in range(n):
        for j in range(n):
            upper[i][n + j] = kind.convert(int(B[i, j]))
            lower[n + i][j] = kind.convert(int(D[i, j]))
    A = [[kind.zero] * n for _ in range(n)]
    for i in range(n):
        A[i][i] = kind.one
        for j in range(i):
            A[i][j] = kind.convert(int(rng.integers(-spread, spread + 1)))
    A_inv_t = [list(col) for col in zip(*_unit_lower_inverse(A))]
    diagonal = [[kind.zero] * size for _ in range(size)]
    for i in range(n):
        for j in range(n):
            diagonal[i][j] = A[i][j]
            diagonal[n + i][n + j] = A_inv_t[i][j]
    return matmul(matmul(upper, lower, kind), diagonal, kind)


def _unit_lower_inverse(A):
    n = len(A)
    inverse = [[QQ(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i):
            inverse[i][j] = -sum((A[i][k] * inverse[k][j] for k in range(j, i)), QQ.zero)
    return inverse
