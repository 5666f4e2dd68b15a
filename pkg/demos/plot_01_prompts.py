"""
Building the judge prompts
==========================

One request per segment: a fixed system prompt with three few-shot
examples, and a user message carrying the segment as JSON.
"""

from openqe import LanguagePair, Segment, build_prompts

###############################################################################
# A segment is one translated paragraph from one system.

pair = LanguagePair.from_names("cs", "de")
seg = Segment("doc7-p2", "sysA", pair,
              'Objednávka "A-17" byla odeslána.',
              'Die Bestellung "A-17" wurde versandt.')

prompts = build_prompts(seg)

###############################################################################
# Only the two language names change in the system prompt. The worked
# examples stay the same for every pair.

print(prompts.system_text.splitlines()[0])
print(len(prompts.system_text), "characters")

###############################################################################
# The user message is plain JSON, quotes escaped.

print(prompts.user_text)

###############################################################################
# These two messages are what goes over the wire.

for m in prompts.messages():
    print(m["role"], len(m["content"]))
