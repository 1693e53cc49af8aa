"""Model backends: a deterministic mock and a transformers-based extractor.

A backend exposes three operations: batch text embedding, batch image
embedding, and teacher-forced answer-token log-probabilities conditioned
on (image, rendered question). Embeddings are returned raw (pooled but not
normalized); the toolkit normalizes on its side.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np


class ExtractionFailure(RuntimeError):
    """A single record could not be processed; the caller logs and skips it."""


class ModelBackend(Protocol):
    def embed_texts(self, texts: Sequence[str]) -> np.ndarray: ...

    def embed_images(self, image_refs: Sequence[str]) -> np.ndarray: ...

    def answer_logprobs(self, image_ref: str, question: str, answer: str) -> list[float]: ...


class MockBackend:
    """Hash-seeded stand-in used for contract tests; no model required.

    Answers tokenize by whitespace; each token gets a stable negative
    log-probability derived from the (answer, position) hash, so repeated
    runs emit identical files.
    """

    def __init__(self, dim: int = 16):
        self.dim = dim

    def _vector(self, key: str) -> np.ndarray:
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        seed = int.from_bytes(digest[:8], "big")
        rng = np.random.Generator(np.random.PCG64(seed))
        vec = rng.standard_normal(self.dim)
        if not np.any(vec):
            vec[0] = 1.0
        return vec

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self._vector("text:" + t) for t in texts])

    def embed_images(self, image_refs: Sequence[str]) -> np.ndarray:
        return np.stack([self._vector("image:" + r) for r in image_refs])

    def tokenize(self, answer: str) -> list[str]:
        return answer.split()

    def answer_logprobs(self, image_ref: str, question: str, answer: str) -> list[float]:
        tokens = self.tokenize(answer)
        if not tokens:
            raise ExtractionFailure("answer has no tokens")
        out = []
        for pos, token in enumerate(tokens):
            digest = hashlib.sha256(f"{answer}|{pos}|{token}".encode("utf-8")).digest()
            frac = int.from_bytes(digest[:4], "big") / 2**32
            out.append(-3.0 * frac)  # in (-3, 0]
        return out


class TransformersBackend:
    """Frozen Hugging Face model extractor.

    Text and image embeddings mean-pool the final hidden states of the
    given encoders. Log-probabilities teacher-force the gold answer behind
    an image+question chat turn through an image-text-to-text model. The
    heavy imports happen here so the mock path stays dependency-free.

    Assumes the model id resolves to an AutoProcessor with a chat template
    accepting image content; models outside that interface need their own
    backend.
    """

    def __init__(
        self,
        model_id: str,
        device: str = "cpu",
        text_encoder_id: str | None = None,
        image_encoder_id: str | None = None,
    ):
        import torch
        from transformers import (
            AutoImageProcessor,
            AutoModel,
            AutoModelForImageTextToText,
            AutoProcessor,
            AutoTokenizer,
        )

        self._torch = torch
        self.device = device
        self.processor = AutoProcessor.from_pretrained(model_id)
        self.model = AutoModelForImageTextToText.from_pretrained(model_id).to(device).eval()

        text_id = text_encoder_id or model_id
        self.text_tokenizer = AutoTokenizer.from_pretrained(text_id)
        self.text_encoder = AutoModel.from_pretrained(text_id).to(device).eval()

        image_id = image_encoder_id or model_id
        self.image_processor = AutoImageProcessor.from_pretrained(image_id)
        self.image_encoder = AutoModel.from_pretrained(image_id).to(device).eval()

    def _mean_pool(self, hidden, mask):
        mask = mask.unsqueeze(-1).to(hidden.dtype)
        return (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)

    def embed_texts(self, texts):
        torch = self._torch
        with torch.no_grad():
            batch = self.text_tokenizer(
                list(texts), padding=True, truncation=True, return_tensors="pt"
            ).to(self.device)
            hidden = self.text_encoder(**batch).last_hidden_state
            pooled = self._mean_pool(hidden, batch["attention_mask"])
        return pooled.double().cpu().numpy()

    def embed_images(self, image_refs):
        from PIL import Image

        torch = self._torch
        images = [Image.open(ref).convert("RGB") for ref in image_refs]
        with torch.no_grad():
            batch = self.image_processor(images=images, return_tensors="pt").to(self.device)
            hidden = self.image_encoder(**batch).last_hidden_state
            pooled = hidden.mean(dim=1)
        return pooled.double().cpu().numpy()

    def answer_logprobs(self, image_ref: str, question: str, answer: str) -> list[float]:
        from PIL import Image

        torch = self._torch
        image = Image.open(image_ref).convert("RGB")
        messages = [
            {
                "role": "user",
                "content": [
                    {"type": "image"},
                    {"type": "text", "text": question},
                ],
            }
        ]
        prompt = self.processor.apply_chat_template(messages, add_generation_prompt=True)
        prompt_inputs = self.processor(text=prompt, images=[image], return_tensors="pt")
        answer_ids = self.processor.tokenizer(
            answer, add_special_tokens=False, return_tensors="pt"
        )["input_ids"]
        if answer_ids.numel() == 0:
            raise ExtractionFailure("answer tokenized to zero tokens")

        input_ids = torch.cat([prompt_inputs["input_ids"], answer_ids], dim=1).to(self.device)
        inputs = {k: v.to(self.device) for k, v in prompt_inputs.items() if k != "input_ids"}
        inputs["input_ids"] = input_ids
        inputs["attention_mask"] = torch.ones_like(input_ids)
        with torch.no_grad():
            logits = self.model(**inputs).logits
        n_answer = answer_ids.shape[1]
        # logits at position t predict token t+1
        pred = logits[0, -n_answer - 1 : -1, :].log_softmax(dim=-1)
        gold = answer_ids[0].to(self.device)
        return pred.gather(1, gold.unsqueeze(1)).squeeze(1).double().cpu().tolist()


def build_backend(model: str, device: str = "cpu", embedding_dim: int = 16) -> ModelBackend:
    if model == "mock":
        return MockBackend(dim=embedding_dim)
    return TransformersBackend(model, device=device)
