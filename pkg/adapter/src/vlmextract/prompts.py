"""Prompt template for generating grounded VQA pairs with external models.

The adapter only renders the prompt; calling a generator API is out of
scope here.
"""

VQA_GENERATION_TEMPLATE = """\
You are generating visual question answering data strictly grounded in the given image. Use only what is visible in the image. Do not rely on outside knowledge. These questions should be inference questions about what is in the picture.
Image: <IMAGE>
Task: Create exactly five diverse VQA pairs about this image.
Constraints: questions must be answerable solely from the image; answers should be short (several words or a number); avoid ambiguous or subjective wording; avoid near-duplicate questions; avoid requiring reading tiny illegible text; if no text is legible, do not ask OCR questions.
Output format: return a single JSON array of five objects. Each object has the following fields
- "question": one string
- "answer": one string (lowercase for each word and numerals for numbers)
Do not include any additional text before or after the JSON.
"""


def synth_prompt_render(image_ref: str) -> str:
    """Render the five-pair VQA generation prompt for one image reference."""
    return VQA_GENERATION_TEMPLATE.replace("<IMAGE>", image_ref)
