"""Research-pod security decisions: ingress, per-tier dataset access, egress
allowlisting, and an append-only audit log.

Every non-allow verdict carries a stable machine-readable reason code from
the closed set below. Policies are immutable; the audit log is the single
mutable structure and serializes appends internally.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import AccessTier, DatasetRecord
from .errors import ValidationError

# verdicts
ALLOW = "allow"
DENY = "deny"
SUMMARY_ONLY = "summary-only"

# reason codes
OK = "OK"
NOT_AUTHENTICATED = "NOT_AUTHENTICATED"
POD_NOT_APPROVED = "POD_NOT_APPROVED"
POD_REQUIRED = "POD_REQUIRED"
NEEDS_DRB_GRANT = "NEEDS_DRB_GRANT"
RESTRICTED_NO_EXPORT = "RESTRICTED_NO_EXPORT"
CREDENTIALED_NO_EXPORT = "CREDENTIALED_NO_EXPORT"
UPLOAD_BLOCKED = "UPLOAD_BLOCKED"
HOST_NOT_VETTED = "HOST_NOT_VETTED"

REASON_CODES = frozenset(
    {
        OK,
        NOT_AUTHENTICATED,
        POD_NOT_APPROVED,
        POD_REQUIRED,
        NEEDS_DRB_GRANT,
        RESTRICTED_NO_EXPORT,
        CREDENTIALED_NO_EXPORT,
        UPLOAD_BLOCKED,
        HOST_NOT_VETTED,
    }
)

ACTIONS = ("summary", "read", "export")
EGRESS_KINDS = ("package-registry", "llm-api", "other")
EGRESS_ACTIONS = ("fetch", "upload")

DEFAULT_REGISTRY_ALLOWLIST = frozenset(
    {
        "pypi.org",
        "files.pythonhosted.org",
        "conda.anaconda.org",  # conda-forge channel host
        "cran.r-project.org",
    }
)


@dataclass(frozen=True)
class Session:
    user_id: str
    vpn_authenticated: bool = False
    approved_pods: frozenset[str] = frozenset()
    pod_dataset_grants: dict = field(default_factory=dict)

    def __post_init__(self):
        for pod_id in self.pod_dataset_grants:
            if pod_id not in self.approved_pods:
                raise ValidationError(f"grant references unapproved pod {pod_id!r}")

    def grants_for(self, pod_id: str) -> frozenset[str]:
        return frozenset(self.pod_dataset_grants.get(pod_id, ()))


@dataclass(frozen=True)
class EgressRequest:
    host: str
    kind: str
    action: str

    def __post_init__(self):
        if not self.host:
            raise ValidationError("host must be nonempty")
        if self.host != self.host.lower():
            raise ValidationError("host must be lowercase")
        if self.kind not in EGRESS_KINDS:
            raise ValidationError(f"unknown egress kind {self.kind!r}")
        if self.action not in EGRESS_ACTIONS:
            raise ValidationError(f"unknown egress action {self.action!r}")


@dataclass(frozen=True)
class EgressPolicy:
    registry_allowlist: frozenset[str] = DEFAULT_REGISTRY_ALLOWLIST
    api_allowlist: frozenset[str] = frozenset()
    upload_allowed: bool = False

    def __post_init__(self):
        for host in (*self.registry_allowlist, *self.api_allowlist):
            if host != host.lower():
                raise ValidationError(f"allowlist host {host!r} must be lowercase")

    @classmethod
    def from_dict(cls, obj: dict) -> "EgressPolicy":
        return cls(
            registry_allowlist=frozenset(
                obj.get("registry_allowlist", DEFAULT_REGISTRY_ALLOWLIST)
            ),
            api_allowlist=frozenset(obj.get("api_allowlist", ())),
            upload_allowed=bool(obj.get("upload_allowed", False)),
        )

    @classmethod
    def load(cls, path) -> "EgressPolicy":
        with Path(path).open(encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class AccessDecision:
    verdict: str
    code: str
    message: str

    def __post_init__(self):
        if self.verdict not in (ALLOW, DENY, SUMMARY_ONLY):
            raise ValidationError(f"unknown verdict {self.verdict!r}")
        if self.code not in REASON_CODES:
            raise ValidationError(f"unknown reason code {self.code!r}")
        if self.verdict in (DENY, SUMMARY_ONLY) and self.code == OK:
            raise ValidationError("non-allow decisions must carry a reason code")

    @property
    def allowed(self) -> bool:
        return self.verdict == ALLOW


def _allow(message="allowed"):
    return AccessDecision(ALLOW, OK, message)


def _deny(code, message):
    return AccessDecision(DENY, code, message)


def evaluate_ingress(session: Session | None, pod_id: str) -> AccessDecision:
    """Allow only authenticated sessions entering one of their approved pods;
    authentication is checked first."""
    if session is None or not session.vpn_authenticated:
        return _deny(NOT_AUTHENTICATED, "VPN authentication required")
    if pod_id not in session.approved_pods:
        return _deny(POD_NOT_APPROVED, f"pod {pod_id!r} is not approved for this user")
    return _allow(f"authenticated entry to pod {pod_id!r}")


def evaluate_dataset_access(
    session: Session | None,
    dataset: DatasetRecord,
    action: str,
    pod_id: str | None = None,
) -> AccessDecision:
    """Tier decision table.

    open: everything allowed. restricted: summary free, read only inside an
    approved pod, export never. credentialed: summary free, read only inside
    an approved pod holding a grant for this dataset, export never.
    """
    if action not in ACTIONS:
        raise ValidationError(f"unknown dataset action {action!r}")
    tier = dataset.tier

    if tier is AccessTier.OPEN:
        return _allow(f"{dataset.id} is open access")

    if action == "summary":
        return _allow(f"summary metadata for {dataset.id}")

    if action == "export":
        if tier is AccessTier.RESTRICTED:
            return _deny(RESTRICTED_NO_EXPORT, "no external export for restricted datasets")
        return _deny(CREDENTIALED_NO_EXPORT, "no external export for credentialed datasets")

    # action == "read" on restricted/credentialed: must happen inside a pod
    if pod_id is None:
        return _deny(POD_REQUIRED, "read access requires a research pod")
    ingress = evaluate_ingress(session, pod_id)
    if not ingress.allowed:
        return ingress
    if tier is AccessTier.RESTRICTED:
        return _allow(f"platform read of {dataset.id} inside pod {pod_id!r}")
    if dataset.id in session.grants_for(pod_id):
        return _allow(f"granted read of {dataset.id} inside pod {pod_id!r}")
    return AccessDecision(
        SUMMARY_ONLY, NEEDS_DRB_GRANT, f"{dataset.id} requires an IRB/DRB grant for this pod"
    )


def evaluate_egress(policy: EgressPolicy, request: EgressRequest) -> AccessDecision:
    """Uploads blocked unless explicitly enabled; fetches allowed only for
    hosts on the allowlist matching the request kind (exact lowercase
    equality, no wildcards)."""
    if request.action == "upload" and not policy.upload_allowed:
        return _deny(UPLOAD_BLOCKED, "outbound uploads are blocked")
    if request.kind == "package-registry":
        allowlist = policy.registry_allowlist
    elif request.kind == "llm-api":
        allowlist = policy.api_allowlist
    else:
        return _deny(HOST_NOT_VETTED, f"egress kind {request.kind!r} is never vetted")
    if request.host in allowlist:
        return _allow(f"{request.host} is on the {request.kind} allowlist")
    return _deny(HOST_NOT_VETTED, f"{request.host} is not on the {request.kind} allowlist")


@dataclass(frozen=True)
class AuditEvent:
    seq: int
    timestamp_ms: int
    user_id: str
    request: str
    verdict: str
    code: str

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp_ms": self.timestamp_ms,
            "user_id": self.user_id,
            "request": self.request,
            "verdict": self.verdict,
            "code": self.code,
        }


class AuditLog:
    """Append-only JSON-Lines log with strictly increasing sequence numbers.

    Reopening an existing file resumes numbering after the last recorded
    event. There is no update or delete operation.
    """

    def __init__(self, path=None):
        self._lock = threading.Lock()
        self._events: list[AuditEvent] = []
        self._path = Path(path) if path is not None else None
        self._next_seq = 1
        if self._path is not None and self._path.exists():
            with self._path.open(encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    obj = json.loads(line)
                    event = AuditEvent(**obj)
                    if event.seq < self._next_seq:
                        raise ValidationError(
                            f"audit log sequence regression at seq {event.seq}"
                        )
                    self._events.append(event)
                    self._next_seq = event.seq + 1

    def __len__(self):
        return len(self._events)

    def append(self, user_id: str, request: str, decision: AccessDecision) -> int:
        with self._lock:
            event = AuditEvent(
                seq=self._next_seq,
                timestamp_ms=int(time.time() * 1000),
                user_id=user_id,
                request=request,
                verdict=decision.verdict,
                code=decision.code,
            )
            if self._path is not None:
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
                    fh.flush()
            self._events.append(event)
            self._next_seq += 1
            return event.seq

    def read(self, from_seq: int = 0) -> list[AuditEvent]:
        with self._lock:
            return [e for e in self._events if e.seq >= from_seq]
