// Copyright 2026 The Auralab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal control surface for the engine's /ws bridge.

'use strict';

const ROWS = 'ABCDE';
const MAX_QUEUE = 100;

let socket = null;
let state = null;
const queue = [];

const $ = (id) => document.getElementById(id);

function send(message) {
  if (socket && socket.readyState === WebSocket.OPEN) {
    socket.send(JSON.stringify(message));
  } else if (queue.length < MAX_QUEUE) {
    queue.push(message);
  } else {
    $('banner').textContent = 'disconnected, event dropped';
  }
}

function connect() {
  const url = (location.protocol === 'https:' ? 'wss://' : 'ws://') + location.host + '/ws';
  socket = new WebSocket(url);
  socket.onopen = () => {
    $('banner').hidden = true;
    while (queue.length) socket.send(JSON.stringify(queue.shift()));
  };
  socket.onclose = () => {
    $('banner').hidden = false;
    setTimeout(connect, 1000);
  };
  socket.onmessage = (event) => {
    const message = JSON.parse(event.data);
    if (message.type === 'state') {
      state = message;
      $('missing').textContent = '';
      render();
    } else if (message.type === 'error') {
      showError(message);
    }
  };
}

function showError(message) {
  $('missing').textContent = message.message;
  for (const cell of message.missing) {
    const row = document.querySelector(`.stimulus[data-label="${cell.label}"]`);
    if (row) row.classList.add('missing');
  }
}

function attributeInfo(id) {
  return state.attributes.find((a) => a.id === id);
}

function renderSeats() {
  const seats = $('seats');
  seats.replaceChildren();
  for (const row of ROWS) {
    for (let col = 1; col <= 5; ++col) {
      const id = row + col;
      const b = document.createElement('button');
      b.textContent = id;
      b.className = id === state.seat ? 'current' : '';
      b.onclick = () => send({type: 'seat', id});
      seats.append(b);
    }
  }
}

function renderStimuli() {
  const box = $('stimuli');
  box.replaceChildren();
  const rated = (state.attribute && state.ratings[state.attribute]) || {};
  for (const label of ['ref', ...state.labels]) {
    const row = document.createElement('div');
    row.className = 'stimulus' + (label === 'ref' ? ' ref' : '');
    row.dataset.label = label;
    const play = document.createElement('button');
    play.textContent = label === 'ref' ? 'Reference' : label;
    play.className = label === state.active ? 'active' : '';
    play.onclick = () => send({type: 'play', label});
    row.append(play);
    if (label !== 'ref' && state.phase === 'rating' && state.attribute) {
      const slider = document.createElement('input');
      slider.type = 'range';
      slider.min = 0;
      slider.max = 100;
      slider.value = rated[label] ?? 50;
      const value = document.createElement('span');
      value.textContent = label in rated ? rated[label] : '-';
      slider.oninput = () => { value.textContent = slider.value; };
      slider.onchange = () => send({
        type: 'rating', attribute: state.attribute, label, value: Number(slider.value)});
      row.append(slider, value);
    }
    box.append(row);
  }
}

function renderSelect(select, options, current, label) {
  select.replaceChildren();
  for (const o of options) {
    const opt = document.createElement('option');
    opt.value = o.value;
    opt.textContent = o.text;
    opt.selected = o.value === current;
    select.append(opt);
  }
  select.onchange = () => send({type: label, [label === 'info' ? 'attribute' : 'id']: select.value});
}

function render() {
  $('phase').textContent = state.finalized ? 'session complete' : state.phase;
  $('trial').textContent = state.trial ? `trial ${state.trial} / ${state.trial_count}` : '';
  $('transport').textContent = state.transport;
  const attr = state.attribute ? attributeInfo(state.attribute) : null;
  $('attribute-title').firstChild.textContent = attr ? attr.name + ' ' : 'Free listening ';
  $('description').textContent = attr ? attr.description : 'no description';
  renderSeats();
  renderStimuli();
  renderSelect($('attribute'),
               state.attributes.map((a) => ({value: a.id, text: a.name})),
               state.attribute, 'info');
  renderSelect($('source'), state.sources.map((s) => ({value: s, text: s})), state.source,
               'source');
}

$('info').onclick = () => {
  const p = $('description');
  p.hidden = !p.hidden;
  if (!p.hidden && state && state.attribute) send({type: 'info', attribute: state.attribute});
};
$('stop').onclick = () => send({type: 'stop'});
$('next').onclick = () => send({type: 'trial_next'});

connect();
