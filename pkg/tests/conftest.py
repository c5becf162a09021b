from __future__ import annotations

import pytest

from corpus import KYC_CONDITIONS, KYC_SCHEMA, SANCTIONS, SRS, kyc_attributes
from zkperm.crypto import ds_keygen
from zkperm.identity import Registry, create_did, issue_credential, register_schema
from zkperm.policy import build_vpr
from zkperm.store import ArtifactStore

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


class Kyc:
    """Keys, registry and lazily built KYC requests shared by a session."""

    def __init__(self, root):
        self.registry = Registry(root / "registry")
        self.store = ArtifactStore(root / "artifacts")
        self.issuer = ds_keygen("issuer-1")
        self.subject = ds_keygen("subject-1")
        self.rogue = ds_keygen("rogue-issuer")
        self.thief = ds_keygen("subject-2")
        create_did(self.issuer, self.registry)
        create_did(self.rogue, self.registry)
        register_schema(KYC_SCHEMA, self.registry)
        self.schema = KYC_SCHEMA
        self.conditions = KYC_CONDITIONS
        self.sanctions = SANCTIONS
        self.vc = self.credential()
        self._vprs = {}

    def credential(self, issuer=None, subject=None, **attrs):
        issuer = issuer or self.issuer
        subject = subject or self.subject
        return issue_credential(issuer.secret_key, subject.public_key, kyc_attributes(**attrs), self.schema)

    def vpr(self, function_id: str, scheme: str, backend: str = "groth16"):
        key = (function_id, scheme, backend)
        if key not in self._vprs:
            self._vprs[key] = build_vpr(
                function_id, self.conditions, scheme, self.schema, [self.sanctions], backend,
                registry=self.registry, store=self.store, srs=SRS,
            )
        return self._vprs[key]


@pytest.fixture(scope="session")
def kyc(tmp_path_factory):
    return Kyc(tmp_path_factory.mktemp("kyc"))
