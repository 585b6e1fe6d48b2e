import { ApiClient, ChatReply } from "../api.js";

function renderTurn(role: string, text: string): HTMLElement {
  const turn = document.createElement("div");
  turn.className = `turn turn-${role}`;
  const who = document.createElement("strong");
  who.textContent = role;
  turn.appendChild(who);
  const body = document.createElement("p");
  body.textContent = text;
  turn.appendChild(body);
  return turn;
}

function renderCitations(reply: ChatReply, client: ApiClient): HTMLElement {
  const list = document.createElement("ul");
  list.className = "citations";
  for (const chunkId of reply.cited_chunk_ids) {
    const li = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = chunkId;
    link.addEventListener("click", async (e) => {
      e.preventDefault();
      const chunk = await client.chunk(chunkId);
      let quote = li.querySelector("blockquote");
      if (!quote) {
        quote = document.createElement("blockquote");
        li.appendChild(quote);
      }
      quote.textContent = chunk.text;
    });
    li.appendChild(link);
    list.appendChild(li);
  }
  return list;
}

export function initChatView(root: HTMLElement, client: ApiClient): void {
  let sessionId: string | null = null;
  let busy = false;

  const transcript = document.createElement("div");
  transcript.className = "transcript";
  root.appendChild(transcript);

  const form = document.createElement("form");
  form.className = "toolbar";
  const input = document.createElement("input");
  input.type = "text";
  input.placeholder = "Ask about the datasets";
  form.appendChild(input);
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Send";
  form.appendChild(button);
  root.appendChild(form);

  form.addEventListener("submit", async (e) => {
    e.preventDefault();
    const text = input.value.trim();
    // a session accepts one in-flight message; the backend enforces the
    // same rule, this just avoids a guaranteed 409
    if (!text || busy) return;
    busy = true;
    button.disabled = true;
    transcript.appendChild(renderTurn("user", text));
    input.value = "";
    try {
      if (sessionId === null) {
        sessionId = (await client.newSession(4)).session_id;
      }
      const reply = await client.chat(sessionId, text);
      const turn = renderTurn("assistant", reply.text);
      turn.appendChild(renderCitations(reply, client));
      transcript.appendChild(turn);
    } catch (err) {
      transcript.appendChild(
        renderTurn("error", err instanceof Error ? err.message : String(err)),
      );
    } finally {
      busy = false;
      button.disabled = false;
      transcript.scrollTop = transcript.scrollHeight;
    }
  });
}
